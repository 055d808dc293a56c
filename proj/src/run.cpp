#include "hotcat/run.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hotcat {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string RunReport::to_json() const {
    json j;
    j["config"] = config;
    j["outputs"] = outputs;
    j["diagnostics"] = diagnostics;
    j["runtime_s"] = runtime_s;
    if (!mismatches.empty()) j["mismatches"] = mismatches;
    return j.dump(2) + "\n";
}

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells) {
            size_t used = 0;
            double v = 0;
            try {
                v = std::stod(c, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != c.size() || c.empty())
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ParseError(path.string() + ": empty file");
    return t;
}

void write_atomic(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a(const std::string& s) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

class Artifacts {
public:
    Artifacts(const RunContext& ctx, RunReport& rep) : ctx_(ctx), rep_(rep) {}

    void emit(const std::string& name, const std::string& content) {
        const fs::path p = ctx_.out_dir / name;
        rep_.outputs.push_back(name);
        if (ctx_.check) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            if (in) ss << in.rdbuf();
            if (!in || ss.str() != content) rep_.mismatches.push_back(name);
            return;
        }
        write_atomic(p, content);
        spdlog::info("wrote {}", p.string());
    }

private:
    const RunContext& ctx_;
    RunReport& rep_;
};

std::string grid_csv(const std::vector<cplx>& pts, const std::vector<double>& vals) {
    std::string s = "re_beta,im_beta,value\n";
    for (size_t i = 0; i < pts.size(); ++i) s += num(pts[i].real()) + "," + num(pts[i].imag()) + "," + num(vals[i]) + "\n";
    return s;
}

std::string sidecar(const RunConfig& c, const GridSpec& g, const std::string& hash) {
    json j;
    j["mode"] = to_string(c.mode);
    j["variant"] = to_string(c.variant);
    j["alpha"] = c.alpha;
    j["n_th"] = c.n_th;
    j["phi"] = c.phi;
    j["params_hash"] = hash;
    j["grid"] = {{"re_min", g.re_min}, {"re_max", g.re_max}, {"im_min", g.im_min},
                 {"im_max", g.im_max}, {"n_re", g.n_re},     {"n_im", g.n_im}};
    j["columns"] = {"re_beta", "im_beta", "value"};
    return j.dump(2) + "\n";
}

// plain graymap; brightness follows sqrt(|W|) so faint fringes stay visible
std::string heatmap_pgm(const GridSpec& g, const std::vector<double>& v) {
    std::string s = "P2\n" + std::to_string(g.n_re) + " " + std::to_string(g.n_im) + "\n255\n";
    const double full = 2 / kPi;
    for (int j = g.n_im - 1; j >= 0; --j) {
        for (int i = 0; i < g.n_re; ++i) {
            const double x = v[static_cast<size_t>(j) * g.n_re + i] / full;
            const double b = 0.5 + 0.5 * std::copysign(std::sqrt(std::min(1.0, std::abs(x))), x);
            s += std::to_string(static_cast<int>(std::lround(255 * b)));
            s += i + 1 < g.n_re ? " " : "\n";
        }
    }
    return s;
}

std::vector<cplx> linecut_points(const LinecutSpec& l) {
    std::vector<cplx> pts;
    for (int i = 0; i < l.n; ++i) {
        const double x = l.min + (l.max - l.min) * i / (l.n - 1);
        pts.push_back(l.axis == "re" ? cplx(x, l.offset) : cplx(l.offset, x));
    }
    return pts;
}

void emit_maps(const RunConfig& c, const RunContext& ctx, Artifacts& out, const std::function<double(cplx)>& f,
               const std::string& hash, RunReport& rep) {
    if (c.grid) {
        const auto pts = c.grid->points();
        const auto vals = parallel_map(pts, f, ctx.jobs);
        out.emit("grid.csv", grid_csv(pts, vals));
        out.emit("grid.json", sidecar(c, *c.grid, hash));
        if (c.heatmap) out.emit("grid.pgm", heatmap_pgm(*c.grid, vals));
        double lo = vals[0], hi = vals[0];
        for (double v : vals) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        rep.diagnostics["grid_min"] = lo;
        rep.diagnostics["grid_max"] = hi;
    }
    if (c.linecut) {
        const auto pts = linecut_points(*c.linecut);
        const auto vals = parallel_map(pts, f, ctx.jobs);
        std::string s = c.linecut->axis == "re" ? "re_beta,value\n" : "im_beta,value\n";
        for (size_t i = 0; i < pts.size(); ++i)
            s += num(c.linecut->axis == "re" ? pts[i].real() : pts[i].imag()) + "," + num(vals[i]) + "\n";
        out.emit("linecut.csv", s);
    }
}

int choose_dim(const RunConfig& c) { return c.dim > 0 ? c.dim : default_dim(c.alpha, c.n_th); }

std::string fit_json(const FitResult& r) {
    json j;
    j["parameters"] = r.parameters;
    j["residual_norm"] = r.residual_norm;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    return j.dump(2) + "\n";
}

FitOptions fit_options(const RunConfig& c) {
    FitOptions o;
    o.simplex.seed = c.seed;
    if (c.fit.residual_threshold > 0) o.residual_threshold = c.fit.residual_threshold;
    return o;
}

std::vector<double> column(const CsvTable& t, const std::string& name) {
    const int k = t.column(name);
    if (k < 0) throw ParseError("input has no column '" + name + "'");
    std::vector<double> v;
    for (const auto& r : t.rows) v.push_back(r[k]);
    return v;
}

void record_state(const JointState& js, const RunConfig& c, const CavityState& rho0, RunReport& rep) {
    const ProtocolReport pr = make_report(js);
    rep.diagnostics["p_g"] = pr.p_g;
    rep.diagnostics["p_e"] = pr.p_e;
    rep.diagnostics["off_diag_norm"] = pr.off_diag_norm;
    if (pr.rho_g) {
        const CavityState ideal = ideal_cat_state(equivalent_operator(c.variant), c.alpha, c.phi, rho0);
        rep.diagnostics["fidelity_g"] = fidelity(ideal, *pr.rho_g);
    }
}

}  // namespace

RunReport run(const RunConfig& c, const RunContext& ctx) {
    c.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.config = serialize_config(c);
    const std::string hash = fnv1a(rep.config);
    Artifacts out(ctx, rep);
    const HamiltonianParams hp = c.hamiltonian.build();

    switch (c.mode) {
        case Mode::Analytic: {
            CatParams p;
            p.alpha = c.alpha;
            p.n_th = c.n_th;
            p.phi = c.phi;
            p.validate();
            const CatVariant v = c.variant == Protocol::ECD ? CatVariant::ECD : CatVariant::qcMAP;
            std::function<double(cplx)> f;
            if (c.timing_tau) {
                const TimingErrorParams te{*c.timing_tau, hp.chi_qc};
                f = [p, te](cplx b) { return timing_error_wigner(b, p, te); };
            } else if (c.normalize) {
                f = [p, v](cplx b) { return cat_wigner_normalized(b, p, v); };
            } else if (v == CatVariant::ECD) {
                f = [p](cplx b) { return cat_wigner_ecd(b, p); };
            } else {
                f = [p](cplx b) { return cat_wigner_qcmap(b, p); };
            }
            emit_maps(c, ctx, out, f, hash, rep);
            if (c.marginal) {
                const Marginal m = marginal_im(f, default_marginal_options(c.alpha, c.n_th, c.marginal->n_samples));
                std::string s = "im_beta,value\n";
                for (size_t i = 0; i < m.im_beta.size(); ++i) s += num(m.im_beta[i]) + "," + num(m.density[i]) + "\n";
                out.emit("marginal.csv", s);
                const FringePeak fp = dominant_fringe(m);
                rep.diagnostics["fringe_period"] = fp.period;
                if (c.alpha > 0) rep.diagnostics["fringe_period_expected"] = kPi / (2 * c.alpha);
            }
            break;
        }
        case Mode::Ideal: {
            const int d = choose_dim(c);
            const CavityState rho0 = thermal_state(c.n_th, d);
            const auto model = SelectivePulseModel::gaussian(c.pulses.sigma_disentangle, hp.chi_qc, d);
            const JointState js = run_ideal_protocol(c.variant, c.alpha, c.phi, rho0, model).first;
            record_state(js, c, rho0, rep);
            rep.diagnostics["dim"] = d;
            emit_maps(c, ctx, out, [&](cplx b) { return measurement_expectation(js, b); }, hash, rep);
            break;
        }
        case Mode::Dynamics: {
            const int d = choose_dim(c);
            const CavityState rho0 = thermal_state(c.n_th, d);
            ScheduleOptions so;
            so.displacement_duration = c.pulses.displacement_duration;
            so.compensate = c.pulses.compensate;
            so.free_offsets = c.pulses.free_offsets;
            const Timeline tl = schedule_protocol(c.variant, c.alpha, c.phi, c.pulses.sigma_disentangle,
                                                  c.pulses.sigma_qubit, hp.chi_qc, so);
            IntegratorOptions io;
            io.step_scale = c.step_scale;
            EvolveStats st;
            const JointState js = simulate_protocol(c.variant, rho0, hp, tl, io, &st);
            record_state(js, c, rho0, rep);
            rep.diagnostics["dim"] = d;
            rep.diagnostics["integrator_steps"] = static_cast<double>(st.steps);
            rep.diagnostics["max_leakage"] = st.max_leakage;
            rep.diagnostics["protocol_duration_s"] = tl.total_duration();
            json tj = json::array();
            for (const auto& s : tl.segments) {
                const char* kind = s.kind == PulseSegment::Kind::Displacement    ? "displacement"
                                   : s.kind == PulseSegment::Kind::FreeEvolution ? "free_evolution"
                                                                                 : "qubit_pulse";
                json e = {{"label", s.label}, {"kind", kind}, {"start", s.start}, {"duration", s.duration}};
                if (s.kind == PulseSegment::Kind::Displacement) e["beta"] = {s.beta.real(), s.beta.imag()};
                if (s.kind == PulseSegment::Kind::QubitPulse) {
                    e["theta"] = s.theta;
                    e["sigma"] = s.sigma;
                    e["phase"] = s.phase;
                }
                tj.push_back(e);
            }
            out.emit("timeline.json", tj.dump(2) + "\n");
            emit_maps(c, ctx, out, [&](cplx b) { return measurement_expectation(js, b); }, hash, rep);
            break;
        }
        case Mode::FitWignerScale: {
            const CsvTable t = read_csv(ctx.base_dir / c.fit.input);
            RawDataGrid raw{column(t, "I"), column(t, "Q"), column(t, "D")};
            const FitResult r = calibrate_wigner_scale(raw, fit_options(c));
            for (const auto& [k, v] : r.parameters) rep.diagnostics[k] = v;
            out.emit("fit.json", fit_json(r));
            break;
        }
        case Mode::FitThermal: {
            const CsvTable t = read_csv(ctx.base_dir / c.fit.input);
            std::vector<double> w, sigma;
            if (t.column("weight") >= 0) {
                const auto n = column(t, "n");
                const auto wt = column(t, "weight");
                for (size_t i = 0; i < n.size(); ++i) {
                    if (n[i] < 0 || n[i] != std::floor(n[i])) throw ParseError("photon numbers must be integers >= 0");
                    const size_t k = static_cast<size_t>(n[i]);
                    if (w.size() <= k) w.resize(k + 1, 0.0);
                    w[k] += wt[i];
                }
            } else {
                const double spacing = c.fit.spacing_hz > 0 ? c.fit.spacing_hz : hp.chi_qc / (2 * kPi);
                if (!(c.fit.linewidth_hz > 0)) throw ValidationError("fit.linewidth_hz > 0 for spectrum input");
                const PeakWeights pw = peak_weights_from_spectrum(column(t, "freq_hz"), column(t, "signal"),
                                                                  c.fit.f0_hz, spacing, c.fit.linewidth_hz,
                                                                  c.fit.n_peaks);
                w = pw.weights;
                sigma = pw.sigma;
                std::string s = "n,weight,sigma\n";
                for (size_t n = 0; n < w.size(); ++n)
                    s += std::to_string(n) + "," + num(w[n]) + "," + num(sigma[n]) + "\n";
                out.emit("peak_weights.csv", s);
            }
            const FitResult r = fit_thermal_occupation(w, sigma);
            for (const auto& [k, v] : r.parameters) rep.diagnostics[k] = v;
            out.emit("fit.json", fit_json(r));
            break;
        }
        case Mode::FitHamiltonian: {
            const CsvTable t = read_csv(ctx.base_dir / c.fit.input);
            const auto beta = column(t, "beta"), qubit = column(t, "qubit"), tt = column(t, "t"), pp = column(t, "p");
            std::vector<RevivalSeries> data;
            for (size_t i = 0; i < beta.size(); ++i) {
                const int q = static_cast<int>(qubit[i]);
                if (data.empty() || data.back().beta != beta[i] || data.back().qubit != q) {
                    data.push_back({});
                    data.back().beta = beta[i];
                    data.back().qubit = q;
                }
                data.back().t.push_back(tt[i]);
                data.back().p.push_back(pp[i]);
            }
            const KerrConvention kc =
                c.fit.kerr_convention == "literal" ? KerrConvention::Literal : KerrConvention::Consistent;
            const FitResult r = fit_hamiltonian(data, kc, fit_options(c));
            for (const auto& [k, v] : r.parameters) rep.diagnostics[k] = v;
            out.emit("fit.json", fit_json(r));
            break;
        }
    }
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!ctx.check) {
        rep.outputs.push_back("report.json");
        write_atomic(ctx.out_dir / "report.json", rep.to_json());
    }
    return rep;
}

}  // namespace hotcat
