#include "hotcat/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>
#include <sstream>

namespace hotcat {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Analytic: return "analytic";
        case Mode::Ideal: return "ideal";
        case Mode::Dynamics: return "dynamics";
        case Mode::FitWignerScale: return "fit-wigner-scale";
        case Mode::FitThermal: return "fit-thermal";
        case Mode::FitHamiltonian: return "fit-hamiltonian";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    for (Mode m : {Mode::Analytic, Mode::Ideal, Mode::Dynamics, Mode::FitWignerScale, Mode::FitThermal,
                   Mode::FitHamiltonian})
        if (to_string(m) == s) return m;
    throw ValidationError("mode");
}

std::string to_string(Protocol p) { return p == Protocol::ECD ? "ECD" : "qcMAP"; }

HamiltonianParams HamiltonianConfig::build() const {
    HamiltonianParams p;
    if (preset == "experimental")
        p = HamiltonianParams::experimental();
    else if (preset == "reference")
        p = HamiltonianParams::reference();
    else
        throw ValidationError("hamiltonian.preset must be experimental or reference");
    const double w = 2 * kPi;
    if (chi_qc_hz) p.chi_qc = w * *chi_qc_hz;
    if (K_c_hz) p.K_c = w * *K_c_hz;
    if (chi_qc_prime_hz) p.chi_qc_prime = w * *chi_qc_prime_hz;
    if (K_c_prime_hz) p.K_c_prime = w * *K_c_prime_hz;
    if (delta_hz) p.delta = w * *delta_hz;
    if (gamma_1) p.gamma_1 = *gamma_1;
    if (gamma_2) p.gamma_2 = *gamma_2;
    if (Gamma) p.Gamma = *Gamma;
    if (n_th_bath) p.n_th_bath = *n_th_bath;
    p.validate();
    return p;
}

void RunConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ValidationError(what);
    };
    for (double v : {alpha, phi, n_th}) need(std::isfinite(v), "alpha, phi and n_th must be finite");
    need(alpha >= 0, "alpha >= 0");
    need(n_th >= 0, "n_th >= 0");
    need(dim == 0 || dim >= 2, "dim >= 2 (or 0 for automatic)");
    if (grid) grid->validate();
    if (linecut) {
        need(linecut->axis == "re" || linecut->axis == "im", "linecut.axis must be re or im");
        need(linecut->n >= 2, "linecut.n >= 2");
        need(linecut->max > linecut->min, "linecut.min < linecut.max");
    }
    if (marginal) need(marginal->n_samples >= 16, "marginal.n_samples >= 16");
    hamiltonian.build();
    need(pulses.sigma_disentangle > 0 && pulses.sigma_qubit > 0, "pulse widths > 0");
    need(pulses.displacement_duration >= 0, "pulses.displacement_duration >= 0");
    need(step_scale > 0 && step_scale <= 1, "integrator.step_scale in (0, 1]");
    if (timing_tau) need(std::isfinite(*timing_tau), "timing_error.tau finite");
    need(fit.kerr_convention == "consistent" || fit.kerr_convention == "literal",
         "fit.kerr_convention must be consistent or literal");
    need(fit.n_peaks >= 3, "fit.n_peaks >= 3");
    need(fit.residual_threshold >= 0, "fit.residual_threshold >= 0");
    const bool fitting = mode == Mode::FitWignerScale || mode == Mode::FitThermal || mode == Mode::FitHamiltonian;
    if (fitting) {
        need(!fit.input.empty(), "fit.input is required for fitting modes");
    } else {
        need(grid || linecut || marginal, "output: one of grid, linecut or marginal is required");
        need(!marginal || mode == Mode::Analytic, "marginal output is only available in analytic mode");
    }
    if (timing_tau) need(mode == Mode::Analytic, "timing_error applies to analytic mode only");
}

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& what) {
    std::ostringstream os;
    os << "config";
    if (n.Mark().line >= 0) os << " line " << n.Mark().line + 1;
    os << ", key '" << key << "': " << what;
    throw ParseError(os.str());
}

void check_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!map.IsMap()) fail(map, where, "expected a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
        const std::string k = kv.first.as<std::string>();
        if (!ok.count(k)) fail(kv.first, where.empty() ? k : where + "." + k, "unknown key");
    }
}

template <class T>
T get(const YAML::Node& map, const std::string& where, const char* key, T dflt) {
    const YAML::Node n = map[key];
    if (!n) return dflt;
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, where.empty() ? key : where + "." + key, "wrong type");
    }
}

template <class T>
std::optional<T> get_opt(const YAML::Node& map, const std::string& where, const char* key) {
    if (!map[key]) return std::nullopt;
    return get<T>(map, where, key, T{});
}

}  // namespace

RunConfig parse_config(const std::string& text, std::optional<Mode> fallback) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull()) {
        if (!fallback) throw ValidationError("mode");
        root = YAML::Node(YAML::NodeType::Map);
    }
    check_keys(root, "", {"mode", "variant", "alpha", "phi", "n_th", "dim", "seed", "normalize", "grid", "linecut",
                          "marginal", "hamiltonian", "pulses", "integrator", "timing_error", "fit", "output"});
    RunConfig c;
    const std::string mode = get<std::string>(root, "", "mode", "");
    if (mode.empty() && fallback)
        c.mode = *fallback;
    else
        c.mode = parse_mode(mode);
    if (fallback && c.mode != *fallback) throw ValidationError("mode: config says " + mode + ", command line says " + to_string(*fallback));
    const std::string variant = get<std::string>(root, "", "variant", "qcMAP");
    if (variant == "ECD")
        c.variant = Protocol::ECD;
    else if (variant == "qcMAP")
        c.variant = Protocol::qcMAP;
    else
        throw ValidationError("variant must be ECD or qcMAP");
    c.alpha = get<double>(root, "", "alpha", c.alpha);
    c.phi = get<double>(root, "", "phi", c.phi);
    c.n_th = get<double>(root, "", "n_th", c.n_th);
    c.dim = get<int>(root, "", "dim", 0);
    c.seed = get<unsigned>(root, "", "seed", 0);
    c.normalize = get<bool>(root, "", "normalize", false);
    if (const auto g = root["grid"]) {
        check_keys(g, "grid", {"re_min", "re_max", "im_min", "im_max", "n_re", "n_im"});
        GridSpec s;
        s.re_min = get<double>(g, "grid", "re_min", s.re_min);
        s.re_max = get<double>(g, "grid", "re_max", s.re_max);
        s.im_min = get<double>(g, "grid", "im_min", s.im_min);
        s.im_max = get<double>(g, "grid", "im_max", s.im_max);
        s.n_re = get<int>(g, "grid", "n_re", s.n_re);
        s.n_im = get<int>(g, "grid", "n_im", s.n_im);
        c.grid = s;
    }
    if (const auto l = root["linecut"]) {
        check_keys(l, "linecut", {"axis", "min", "max", "n", "offset"});
        LinecutSpec s;
        s.axis = get<std::string>(l, "linecut", "axis", s.axis);
        s.min = get<double>(l, "linecut", "min", s.min);
        s.max = get<double>(l, "linecut", "max", s.max);
        s.n = get<int>(l, "linecut", "n", s.n);
        s.offset = get<double>(l, "linecut", "offset", s.offset);
        c.linecut = s;
    }
    if (const auto m = root["marginal"]) {
        check_keys(m, "marginal", {"n_samples"});
        MarginalSpec s;
        s.n_samples = get<int>(m, "marginal", "n_samples", s.n_samples);
        c.marginal = s;
    }
    if (const auto h = root["hamiltonian"]) {
        check_keys(h, "hamiltonian", {"preset", "chi_qc_hz", "K_c_hz", "chi_qc_prime_hz", "K_c_prime_hz", "delta_hz",
                                      "gamma_1", "gamma_2", "Gamma", "n_th_bath"});
        auto& hc = c.hamiltonian;
        hc.preset = get<std::string>(h, "hamiltonian", "preset", hc.preset);
        hc.chi_qc_hz = get_opt<double>(h, "hamiltonian", "chi_qc_hz");
        hc.K_c_hz = get_opt<double>(h, "hamiltonian", "K_c_hz");
        hc.chi_qc_prime_hz = get_opt<double>(h, "hamiltonian", "chi_qc_prime_hz");
        hc.K_c_prime_hz = get_opt<double>(h, "hamiltonian", "K_c_prime_hz");
        hc.delta_hz = get_opt<double>(h, "hamiltonian", "delta_hz");
        hc.gamma_1 = get_opt<double>(h, "hamiltonian", "gamma_1");
        hc.gamma_2 = get_opt<double>(h, "hamiltonian", "gamma_2");
        hc.Gamma = get_opt<double>(h, "hamiltonian", "Gamma");
        hc.n_th_bath = get_opt<double>(h, "hamiltonian", "n_th_bath");
    }
    if (const auto p = root["pulses"]) {
        check_keys(p, "pulses",
                   {"sigma_disentangle", "sigma_qubit", "displacement_duration", "compensate", "free_offsets"});
        auto& pc = c.pulses;
        pc.sigma_disentangle = get<double>(p, "pulses", "sigma_disentangle", pc.sigma_disentangle);
        pc.sigma_qubit = get<double>(p, "pulses", "sigma_qubit", pc.sigma_qubit);
        pc.displacement_duration = get<double>(p, "pulses", "displacement_duration", pc.displacement_duration);
        pc.compensate = get<bool>(p, "pulses", "compensate", pc.compensate);
        pc.free_offsets = get<std::vector<double>>(p, "pulses", "free_offsets", {});
    }
    if (const auto i = root["integrator"]) {
        check_keys(i, "integrator", {"step_scale"});
        c.step_scale = get<double>(i, "integrator", "step_scale", c.step_scale);
    }
    if (const auto t = root["timing_error"]) {
        check_keys(t, "timing_error", {"tau"});
        c.timing_tau = get<double>(t, "timing_error", "tau", 0.0);
    }
    if (const auto f = root["fit"]) {
        check_keys(f, "fit",
                   {"input", "kerr_convention", "f0_hz", "spacing_hz", "linewidth_hz", "n_peaks", "residual_threshold"});
        auto& fc = c.fit;
        fc.input = get<std::string>(f, "fit", "input", "");
        fc.kerr_convention = get<std::string>(f, "fit", "kerr_convention", fc.kerr_convention);
        fc.f0_hz = get<double>(f, "fit", "f0_hz", 0);
        fc.spacing_hz = get<double>(f, "fit", "spacing_hz", 0);
        fc.linewidth_hz = get<double>(f, "fit", "linewidth_hz", 0);
        fc.n_peaks = get<int>(f, "fit", "n_peaks", fc.n_peaks);
        fc.residual_threshold = get<double>(f, "fit", "residual_threshold", 0);
    }
    if (const auto o = root["output"]) {
        check_keys(o, "output", {"heatmap"});
        c.heatmap = get<bool>(o, "output", "heatmap", false);
    }
    c.validate();
    return c;
}

std::string serialize_config(const RunConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "mode" << YAML::Value << to_string(c.mode);
    e << YAML::Key << "variant" << YAML::Value << to_string(c.variant);
    e << YAML::Key << "alpha" << YAML::Value << c.alpha;
    e << YAML::Key << "phi" << YAML::Value << c.phi;
    e << YAML::Key << "n_th" << YAML::Value << c.n_th;
    e << YAML::Key << "dim" << YAML::Value << c.dim;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "normalize" << YAML::Value << c.normalize;
    if (c.grid) {
        const auto& g = *c.grid;
        e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "re_min" << YAML::Value << g.re_min << YAML::Key << "re_max" << YAML::Value << g.re_max;
        e << YAML::Key << "im_min" << YAML::Value << g.im_min << YAML::Key << "im_max" << YAML::Value << g.im_max;
        e << YAML::Key << "n_re" << YAML::Value << g.n_re << YAML::Key << "n_im" << YAML::Value << g.n_im;
        e << YAML::EndMap;
    }
    if (c.linecut) {
        const auto& l = *c.linecut;
        e << YAML::Key << "linecut" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "axis" << YAML::Value << l.axis;
        e << YAML::Key << "min" << YAML::Value << l.min << YAML::Key << "max" << YAML::Value << l.max;
        e << YAML::Key << "n" << YAML::Value << l.n << YAML::Key << "offset" << YAML::Value << l.offset;
        e << YAML::EndMap;
    }
    if (c.marginal) {
        e << YAML::Key << "marginal" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "n_samples" << YAML::Value << c.marginal->n_samples << YAML::EndMap;
    }
    {
        const auto& h = c.hamiltonian;
        e << YAML::Key << "hamiltonian" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "preset" << YAML::Value << h.preset;
        auto opt = [&](const char* k, const std::optional<double>& v) {
            if (v) e << YAML::Key << k << YAML::Value << *v;
        };
        opt("chi_qc_hz", h.chi_qc_hz);
        opt("K_c_hz", h.K_c_hz);
        opt("chi_qc_prime_hz", h.chi_qc_prime_hz);
        opt("K_c_prime_hz", h.K_c_prime_hz);
        opt("delta_hz", h.delta_hz);
        opt("gamma_1", h.gamma_1);
        opt("gamma_2", h.gamma_2);
        opt("Gamma", h.Gamma);
        opt("n_th_bath", h.n_th_bath);
        e << YAML::EndMap;
    }
    {
        const auto& p = c.pulses;
        e << YAML::Key << "pulses" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "sigma_disentangle" << YAML::Value << p.sigma_disentangle;
        e << YAML::Key << "sigma_qubit" << YAML::Value << p.sigma_qubit;
        e << YAML::Key << "displacement_duration" << YAML::Value << p.displacement_duration;
        e << YAML::Key << "compensate" << YAML::Value << p.compensate;
        e << YAML::Key << "free_offsets" << YAML::Value << YAML::Flow << p.free_offsets;
        e << YAML::EndMap;
    }
    e << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "step_scale" << YAML::Value << c.step_scale << YAML::EndMap;
    if (c.timing_tau) {
        e << YAML::Key << "timing_error" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "tau" << YAML::Value << *c.timing_tau << YAML::EndMap;
    }
    {
        const auto& f = c.fit;
        e << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "input" << YAML::Value << f.input;
        e << YAML::Key << "kerr_convention" << YAML::Value << f.kerr_convention;
        e << YAML::Key << "f0_hz" << YAML::Value << f.f0_hz;
        e << YAML::Key << "spacing_hz" << YAML::Value << f.spacing_hz;
        e << YAML::Key << "linewidth_hz" << YAML::Value << f.linewidth_hz;
        e << YAML::Key << "n_peaks" << YAML::Value << f.n_peaks;
        e << YAML::Key << "residual_threshold" << YAML::Value << f.residual_threshold;
        e << YAML::EndMap;
    }
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "heatmap" << YAML::Value << c.heatmap << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace hotcat
