#include "hotcat/tomography.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace hotcat {

void GridSpec::validate() const {
    if (n_re < 2 || n_im < 2) throw ValidationError("grid counts must be >= 2");
    for (double v : {re_min, re_max, im_min, im_max})
        if (!std::isfinite(v)) throw ValidationError("grid bounds must be finite");
    if (!(re_max > re_min) || !(im_max > im_min)) throw ValidationError("grid bounds must satisfy min < max");
}

std::vector<cplx> GridSpec::points() const {
    validate();
    std::vector<cplx> pts;
    pts.reserve(static_cast<size_t>(n_re) * n_im);
    for (int j = 0; j < n_im; ++j) {
        const double y = im_min + (im_max - im_min) * j / (n_im - 1);
        for (int i = 0; i < n_re; ++i) pts.emplace_back(re_min + (re_max - re_min) * i / (n_re - 1), y);
    }
    return pts;
}

double measurement_expectation(const JointState& s, cplx beta) {
    // blocks are left unnormalized, so their weights come for free
    return wigner_of_matrix(s.block(0, 0), beta) - wigner_of_matrix(s.block(1, 1), beta);
}

std::vector<double> parallel_map(const std::vector<cplx>& points, const std::function<double(cplx)>& f,
                                 unsigned jobs) {
    std::vector<double> out(points.size());
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, std::max<size_t>(1, points.size()));
    if (jobs <= 1) {
        for (size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
        return out;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    const size_t chunk = (points.size() + jobs - 1) / jobs;
    for (unsigned w = 0; w < jobs; ++w) {
        const size_t lo = w * chunk, hi = std::min(points.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (size_t i = lo; i < hi; ++i) out[i] = f(points[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

WignerGrid wigner_map(const JointState& s, const GridSpec& spec, unsigned jobs) {
    WignerGrid g;
    g.spec = spec;
    g.points = spec.points();
    g.values = parallel_map(g.points, [&](cplx b) { return measurement_expectation(s, b); }, jobs);
    return g;
}

WignerGrid wigner_map(const CavityState& s, const GridSpec& spec, unsigned jobs) {
    WignerGrid g;
    g.spec = spec;
    g.points = spec.points();
    g.values = parallel_map(g.points, [&](cplx b) { return wigner_numeric(s, b); }, jobs);
    return g;
}

void RawDataGrid::validate() const {
    if (I.size() != Q.size() || I.size() != D.size()) throw ValidationError("raw grid: I, Q and D lengths differ");
    if (I.size() < 3) throw InsufficientData("raw grid: fewer than 3 samples");
    for (size_t i = 0; i < I.size(); ++i)
        if (!std::isfinite(I[i]) || !std::isfinite(Q[i]) || !std::isfinite(D[i]))
            throw ValidationError("raw grid: non-finite sample");
}

double FitResult::at(const std::string& key) const {
    auto it = parameters.find(key);
    if (it == parameters.end()) throw ValidationError("fit result has no parameter '" + key + "'");
    return it->second;
}

double fock1_wigner(cplx beta) {
    const double r2 = std::norm(beta);
    return 2.0 / kPi * (4 * r2 - 1) * std::exp(-2 * r2);
}

FitResult calibrate_wigner_scale(const RawDataGrid& raw, const FitOptions& opt) {
    raw.validate();
    const auto [dmin, dmax] = std::minmax_element(raw.D.begin(), raw.D.end());
    if (*dmax - *dmin <= 1e-300 * std::max(1.0, std::abs(*dmax))) throw DegenerateData("raw grid: D is constant");
    if (!(*dmin < 0 && *dmax > 0)) throw ValidationError("raw grid does not cover the Fock-1 ring: D keeps one sign");

    const size_t m = raw.D.size();
    // chi_W is linear in the model: profile it out
    auto profile = [&](double ci, double cq, double* inv_w) {
        double dw = 0, ww = 0, dd = 0;
        for (size_t k = 0; k < m; ++k) {
            const double w = fock1_wigner(cplx(ci * raw.I[k], cq * raw.Q[k]));
            dw += raw.D[k] * w;
            ww += w * w;
            dd += raw.D[k] * raw.D[k];
        }
        if (ww <= 0) return dd;
        if (inv_w) *inv_w = dw / ww;
        return std::max(0.0, dd - dw * dw / ww);
    };
    auto ssr = [&](double ci, double cq, double inv_w) {
        double s = 0;
        for (size_t k = 0; k < m; ++k) {
            const double r = raw.D[k] - inv_w * fock1_wigner(cplx(ci * raw.I[k], cq * raw.Q[k]));
            s += r * r;
        }
        return s;
    };

    double rmax = 0;
    for (size_t k = 0; k < m; ++k) rmax = std::max(rmax, std::hypot(raw.I[k], raw.Q[k]));
    if (!(rmax > 0)) throw DegenerateData("raw grid: all samples at the origin");
    // isotropic scan for a starting scale
    double s0 = 1 / rmax, best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 400; ++k) {
        const double s = 0.3 / rmax * std::pow(100.0, k / 400.0);
        const double v = profile(s, s, nullptr);
        if (v < best) {
            best = v;
            s0 = s;
        }
    }
    // the profiled form loses precision near zero residual; polish on the full SSR
    auto f = [&](const std::vector<double>& x) {
        double inv_w = 0;
        profile(x[0] * s0, x[1] * s0, &inv_w);
        return ssr(x[0] * s0, x[1] * s0, inv_w);
    };
    SimplexOptions so = opt.simplex;
    so.initial_step = 0.05;
    SimplexResult r = multistart_nelder_mead(f, {1.0, 1.0}, so);
    double inv_w = 0;
    const double ci = std::abs(r.x[0] * s0), cq = std::abs(r.x[1] * s0);
    profile(ci, cq, &inv_w);
    // the residual at fixed (chi_I, chi_Q) is also linear in 1/chi_W: refine it jointly
    auto g = [&](const std::vector<double>& x) { return ssr(x[0] * ci, x[1] * cq, x[2] * inv_w); };
    SimplexOptions so2 = so;
    so2.initial_step = 1e-4;
    so2.starts = 1;
    SimplexResult r2 = nelder_mead(g, {1.0, 1.0, 1.0}, so2);
    FitResult out;
    out.parameters["chi_I"] = std::abs(r2.x[0] * ci);
    out.parameters["chi_Q"] = std::abs(r2.x[1] * cq);
    out.parameters["chi_W"] = 1.0 / (r2.x[2] * inv_w);
    out.residual_norm = std::sqrt(r2.value);
    out.iterations = r.iterations + r2.iterations;
    out.converged = r.converged && out.residual_norm <= opt.residual_threshold;
    return out;
}

FitResult fit_thermal_occupation(const std::vector<double>& weights, const std::vector<double>& sigma) {
    if (weights.size() < 3) throw InsufficientData("thermal fit needs weights for at least 3 photon numbers");
    for (double w : weights)
        if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("thermal fit: weights must be finite and >= 0");
    std::vector<int> idx;
    for (size_t n = 0; n < weights.size(); ++n)
        if (weights[n] > 0) idx.push_back(static_cast<int>(n));
    if (!sigma.empty() && sigma.size() != weights.size()) throw ValidationError("thermal fit: sigma length differs");
    if (idx.empty()) throw DegenerateData("thermal fit: all weights are zero");
    FitResult out;
    out.iterations = 1;
    out.converged = true;
    if (idx.size() == 1) {
        if (idx[0] != 0) throw InsufficientData("thermal fit: a single populated peak above n=0");
        // everything in the ground peak: cold
        out.parameters["n_th"] = 0;
        out.parameters["ratio"] = 0;
        return out;
    }
    // log w_n = a + n log r; noise is multiplicative, so the log residuals are
    // treated as equally uncertain
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd a(k, 2);
    Eigen::VectorXd y(k);
    for (int i = 0; i < k; ++i) {
        const double w = sigma.empty() || !(sigma[idx[i]] > 0) ? 1.0 : weights[idx[i]] / sigma[idx[i]];
        a(i, 0) = w;
        a(i, 1) = w * idx[i];
        y(i) = w * std::log(weights[idx[i]]);
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    const double r = std::exp(c(1));
    if (!(r < 1)) throw ConvergenceError("thermal fit: weights do not decay with n");
    out.parameters["ratio"] = r;
    out.parameters["n_th"] = r / (1 - r);
    out.residual_norm = (a * c - y).norm();
    return out;
}

namespace {

double lorentzian(double f, double center, double hw) {
    const double x = (f - center) / hw;
    return 1 / (1 + x * x);
}

}  // namespace

PeakWeights peak_weights_from_spectrum(const std::vector<double>& freq, const std::vector<double>& signal,
                                               double f0, double spacing, double linewidth, int n_peaks) {
    if (freq.size() != signal.size()) throw ValidationError("spectrum: frequency and signal lengths differ");
    if (n_peaks < 3) throw InsufficientData("spectrum: need at least 3 peaks");
    if (static_cast<int>(freq.size()) < n_peaks) throw InsufficientData("spectrum: fewer samples than peaks");
    if (!(linewidth > 0) || !(spacing > 0)) throw ValidationError("spectrum: linewidth and spacing must be > 0");
    Eigen::MatrixXd a(freq.size(), n_peaks);
    Eigen::VectorXd y(freq.size());
    for (size_t i = 0; i < freq.size(); ++i) {
        y(i) = signal[i];
        for (int n = 0; n < n_peaks; ++n) a(i, n) = lorentzian(freq[i], f0 - n * spacing, linewidth);
    }
    const Eigen::VectorXd w = a.colPivHouseholderQr().solve(y);
    const double dof = std::max(1.0, static_cast<double>(freq.size()) - n_peaks);
    const double s2 = (a * w - y).squaredNorm() / dof;
    const Eigen::MatrixXd cov = s2 * (a.transpose() * a).inverse();
    PeakWeights out;
    for (int n = 0; n < n_peaks; ++n) {
        out.weights.push_back(std::max(0.0, w(n)));
        out.sigma.push_back(std::sqrt(std::max(0.0, cov(n, n))));
    }
    return out;
}

std::vector<double> thermal_spectrum(const std::vector<double>& freq, double n_th, double f0, double spacing,
                                     double linewidth, int n_peaks) {
    const double r = n_th / (n_th + 1);
    std::vector<double> out(freq.size(), 0.0);
    for (size_t i = 0; i < freq.size(); ++i)
        for (int n = 0; n < n_peaks; ++n)
            out[i] += (1 - r) * std::pow(r, n) * lorentzian(freq[i], f0 - n * spacing, linewidth);
    return out;
}

FitResult fit_frequency_shifts(const std::vector<double>& beta2, const std::vector<double>& omega,
                               KerrConvention conv) {
    if (beta2.size() != omega.size()) throw ValidationError("frequency shifts: length mismatch");
    std::set<double> distinct(beta2.begin(), beta2.end());
    if (distinct.size() < 3) throw InsufficientData("frequency shifts: need at least 3 distinct |beta|");
    const int k = static_cast<int>(beta2.size());
    Eigen::MatrixXd a(k, 3);
    Eigen::VectorXd y(k);
    for (int i = 0; i < k; ++i) {
        a(i, 0) = 1;
        a(i, 1) = beta2[i];
        a(i, 2) = beta2[i] * beta2[i];
        y(i) = omega[i];
    }
    // columns differ wildly in scale; solve in normalized form
    Eigen::Vector3d sc = a.colwise().norm().transpose();
    const Eigen::VectorXd cn = (a * sc.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(y);
    const Eigen::Vector3d c = cn.cwiseQuotient(sc);
    FitResult out;
    const double k1 = conv == KerrConvention::Consistent ? 1.0 : 2.0;
    const double k2 = conv == KerrConvention::Consistent ? 2.0 : 6.0;
    out.parameters["delta"] = c(0);
    out.parameters["K_c"] = -k1 * c(1);
    out.parameters["K_c_prime"] = -k2 * c(2);
    out.residual_norm = (a * c - y).norm();
    out.iterations = 1;
    out.converged = true;
    return out;
}

RevivalFit fit_revival(const RevivalSeries& s, const FitOptions& opt) {
    const size_t m = s.t.size();
    if (s.p.size() != m) throw ValidationError("revival series: t and p lengths differ");
    if (m < 8) throw InsufficientData("revival series: fewer than 8 samples");
    if (!(s.beta > 0)) throw ValidationError("revival series: |beta| must be > 0");
    double dt_min = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < m; ++i) {
        const double dt = s.t[i] - s.t[i - 1];
        if (!(dt > 0)) throw ValidationError("revival series: times must increase");
        dt_min = std::min(dt_min, dt);
    }
    const double span = s.t.back() - s.t.front();
    const double n = s.beta * s.beta;
    auto ssr = [&](double w, double decay) {
        double acc = 0;
        for (size_t i = 0; i < m; ++i) {
            const double r = std::exp(-2 * n * (1 - std::cos(w * s.t[i])) - decay * s.t[i]) - s.p[i];
            acc += r * r;
        }
        return acc;
    };
    // Revivals are narrow in omega*t, so the scan has to be fine. When the
    // first revival is resolved it brackets omega; otherwise scan up to the
    // Nyquist limit.
    const double dw = 0.25 / (std::max(1.0, s.beta) * span);
    double w_lo = dw, w_hi = kPi / dt_min;
    {
        size_t i = 0;
        while (i < m && s.p[i] > 0.5 * s.p[0]) ++i;
        size_t best_i = m;
        for (size_t j = i + 1; j + 1 < m; ++j)
            if (s.p[j] >= s.p[j - 1] && s.p[j] >= s.p[j + 1] && s.p[j] > 0.25 * s.p[0]) {
                best_i = j;
                break;
            }
        if (best_i < m && s.t[best_i] > s.t[0]) {
            const double w1 = 2 * kPi / (s.t[best_i] - s.t[0]);
            w_lo = std::max(dw, 0.85 * w1);
            w_hi = std::min(w_hi, 1.15 * w1);
        }
    }
    double w0 = w_lo, best = std::numeric_limits<double>::infinity();
    for (double w = w_lo; w <= w_hi; w += dw) {
        const double v = ssr(w, 0.0);
        if (v < best) {
            best = v;
            w0 = w;
        }
    }
    if (w0 * span < 2 * kPi) throw InsufficientData("revival series shorter than one revival period");
    auto f = [&](const std::vector<double>& x) { return ssr(w0 + x[0] * dw, std::abs(x[1]) / span); };
    SimplexResult r = multistart_nelder_mead(f, {0.0, 0.0}, opt.simplex);
    RevivalFit out;
    out.omega = w0 + r.x[0] * dw;
    out.decay = std::abs(r.x[1]) / span;
    out.residual_norm = std::sqrt(r.value);
    out.iterations = r.iterations;
    out.converged = r.converged && out.residual_norm <= opt.residual_threshold;
    return out;
}

FitResult fit_hamiltonian(const std::vector<RevivalSeries>& data, KerrConvention conv, const FitOptions& opt) {
    if (data.empty()) throw InsufficientData("hamiltonian fit: no revival data");
    FitResult out;
    out.converged = true;
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_level;
    std::map<int, int> counter;
    for (const auto& s : data) {
        if (s.qubit != 0 && s.qubit != 1) throw ValidationError("revival series: qubit must be 0 (g) or 1 (e)");
        const RevivalFit rf = fit_revival(s, opt);
        const int i = counter[s.qubit]++;
        out.parameters[std::string("omega_") + (s.qubit ? "e_" : "g_") + std::to_string(i)] = rf.omega;
        // the revival tracks E(n+1) - E(n) around n = |beta|^2 - 1/2
        by_level[s.qubit].first.push_back(s.beta * s.beta - 0.5);
        by_level[s.qubit].second.push_back(rf.omega);
        out.iterations += rf.iterations;
        out.converged = out.converged && rf.converged;
        out.residual_norm = std::hypot(out.residual_norm, rf.residual_norm);
        spdlog::debug("revival |beta|={} qubit={} omega={} decay={}", s.beta, s.qubit, rf.omega, rf.decay);
    }
    std::map<int, FitResult> stage2;
    for (const auto& [q, xy] : by_level) stage2[q] = fit_frequency_shifts(xy.first, xy.second, conv);
    const bool both = stage2.size() == 2;
    for (const auto& [q, fr] : stage2)
        for (const auto& [key, v] : fr.parameters) out.parameters[both ? key + (q ? "_e" : "_g") : key] = v;
    if (both) {
        // e-level: Delta - chi, K + chi', K' (chi' as the excess Kerr)
        const FitResult& g = stage2[0];
        const FitResult& e = stage2[1];
        out.parameters["delta"] = g.at("delta");
        out.parameters["K_c"] = g.at("K_c");
        out.parameters["K_c_prime"] = g.at("K_c_prime");
        out.parameters["chi_qc"] = g.at("delta") - e.at("delta");
        out.parameters["chi_qc_prime"] = e.at("K_c") - g.at("K_c");
    }
    if (out.residual_norm > opt.residual_threshold) out.converged = false;
    return out;
}

RevivalSeries synthesize_revival(const HamiltonianParams& params, double beta, int qubit,
                                 const std::vector<double>& times, int dim) {
    if (qubit != 0 && qubit != 1) throw ValidationError("synthesize_revival: qubit must be 0 or 1");
    HamiltonianParams p = params;
    p.gamma_1 = 0;
    p.gamma_2 = 0;
    RevivalSeries s;
    s.beta = beta;
    s.qubit = qubit;
    const CavityState coh = coherent_state(beta, dim);
    const Eigen::VectorXcd v = displacement(beta, dim).matrix().col(0);
    JointState js = product_state(coh, qubit ? excited_projector() : ground_projector());
    double t = 0;
    for (double tt : times) {
        if (tt < t) throw ValidationError("synthesize_revival: times must be non-decreasing from 0");
        if (tt > t) js = lindblad_evolve(js, p, PulseSegment::free_evolution(t, tt - t));
        t = tt;
        s.t.push_back(tt);
        s.p.push_back((v.adjoint() * js.block(qubit, qubit) * v)(0, 0).real());
    }
    return s;
}

}  // namespace hotcat
