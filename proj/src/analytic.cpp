#include "hotcat/analytic.hpp"

#include <spdlog/spdlog.h>

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hotcat/errors.hpp"
#include "hotcat/fockspace.hpp"

namespace hotcat {

double purity_from_nth(double n_th) { return 1.0 / (2.0 * n_th + 1.0); }

double CatParams::xi_th() const {
    const double P = purity();
    if (P >= 1.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * P / (1.0 - P * P));
}

void CatParams::validate() const {
    if (!(n_th >= 0) || !std::isfinite(n_th)) throw ValidationError("n_th must be finite and >= 0");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw ValidationError("alpha must be finite");
    if (!std::isfinite(phi)) throw ValidationError("phi must be finite");
}

double thermal_wigner(cplx beta, double n_th) {
    const double P = purity_from_nth(n_th);
    return 2.0 * P / kPi * std::exp(-2.0 * P * std::norm(beta));
}

double thermal_charfn(cplx beta, double n_th) {
    const double P = purity_from_nth(n_th);
    return std::exp(-std::norm(beta) / (2.0 * P));
}

namespace {

// 4 Im{alpha^* beta}
double fringe_phase(cplx alpha, cplx beta) { return 4.0 * std::imag(std::conj(alpha) * beta); }

}  // namespace

double cat_wigner_ecd(cplx beta, const CatParams& p) {
    const double P = p.purity();
    const cplx a = p.alpha;
    return P / kPi *
           (std::exp(-2 * P * std::norm(beta - a)) + std::exp(-2 * P * std::norm(beta + a)) -
            2 * std::cos(fringe_phase(a, beta) + p.phi) * std::exp(-2 * P * std::norm(beta)));
}

double cat_wigner_qcmap(cplx beta, const CatParams& p) {
    const double P = p.purity();
    const cplx a = p.alpha;
    return (P * (std::exp(-2 * P * std::norm(beta - a)) + std::exp(-2 * P * std::norm(beta + a))) -
            2 * std::cos(fringe_phase(a, beta) + p.phi) * std::exp(-2 * std::norm(beta) / P)) /
           kPi;
}

double cat_trace_ecd(const CatParams& p) {
    return 1.0 - std::cos(p.phi) * thermal_charfn(2.0 * p.alpha, p.n_th);
}

double cat_trace_qcmap(const CatParams& p) {
    const double P = p.purity();
    return 1.0 - std::cos(p.phi) * P * std::exp(-2 * P * std::norm(p.alpha));
}

double cat_wigner_normalized(cplx beta, const CatParams& p, CatVariant v) {
    switch (v) {
        case CatVariant::ECD:
            return cat_wigner_ecd(beta, p) / cat_trace_ecd(p);
        case CatVariant::qcMAP:
            return cat_wigner_qcmap(beta, p) / cat_trace_qcmap(p);
        case CatVariant::ECD_prime: {
            CatParams q = p;
            q.phi = p.phi + 2 * std::norm(p.alpha);
            const double n = p.n_th;
            const double w = cat_wigner_general(
                beta, p.alpha, p.phi, [n](cplx b) { return thermal_wigner(b, n); },
                [n](cplx b) { return cplx(thermal_charfn(b, n)); }, CatVariant::ECD_prime);
            return w / cat_trace_ecd(q);
        }
    }
    return 0;
}

double cat_wigner_general(cplx beta, cplx alpha, double phi, const WignerFn& w0, const CharFn& chi0,
                          CatVariant variant) {
    const double th = fringe_phase(alpha, beta);
    switch (variant) {
        case CatVariant::ECD:
            return 0.5 * (w0(beta - alpha) + w0(beta + alpha) - 2 * std::cos(th + phi) * w0(beta));
        case CatVariant::ECD_prime: {
            const cplx mi(0, -1);
            return 0.5 * (w0(mi * (beta - alpha)) + w0(mi * (beta + alpha)) -
                          2 * std::cos(th + phi + 2 * std::norm(alpha)) * w0(mi * beta));
        }
        case CatVariant::qcMAP:
            return 0.5 * (w0(beta - alpha) + w0(-beta - alpha) -
                          4 / kPi * std::real(std::exp(cplx(0, th + phi)) * chi0(2.0 * beta)));
    }
    return 0;
}

double coherence_thermal(double x1, double x2, double n_th) {
    const double P = purity_from_nth(n_th);
    const double d = x1 - x2;
    return std::exp(-d * d * (1 - P * P) / (4 * P));
}

namespace {

// value = mant * exp(scale); lets cosh of arguments in the hundreds be
// combined without overflow
struct Scaled {
    double scale;
    cplx mant;
};

Scaled scaled_cosh(cplx z) {
    const double a = std::abs(z.real());
    const double e = std::exp(-2 * a);
    const double s = z.real() >= 0 ? 1.0 : -1.0;
    // cosh(x+iy) = cosh x cos y + i sinh x sin y
    const cplx m(0.5 * (1 + e) * std::cos(z.imag()), 0.5 * s * (1 - e) * std::sin(z.imag()));
    return {a, m};
}

Scaled times_exp(Scaled v, double log_factor) { return {v.scale + log_factor, v.mant}; }

// log |a - b|
double log_abs_diff(Scaled a, Scaled b) {
    const double s = std::max(a.scale, b.scale);
    const cplx v = a.mant * std::exp(a.scale - s) - b.mant * std::exp(b.scale - s);
    return std::log(std::abs(v)) + s;
}

double inv_two_xi2(double P) { return (1 - P * P) / (4 * P); }

}  // namespace

double coherence_ecd(double x1, double x2, const CatParams& p) {
    const double P = p.purity();
    const double a = std::abs(p.alpha);
    const double k = inv_two_xi2(P);  // 1/(2 xi^2)
    const double xb = 0.5 * (x1 + x2), dx = x1 - x2;
    const double r2 = std::sqrt(2.0);
    // e^{-4 alpha^2/xi^2} = e^{-8 k alpha^2}
    const double cross = -8 * k * a * a;
    const Scaled num_a = scaled_cosh(cplx(2 * r2 * a * P * xb, 0));
    const Scaled num_b = times_exp(scaled_cosh(cplx(r2 * a * dx / P, -p.phi)), cross);
    const double log_num = -k * dx * dx + log_abs_diff(num_a, num_b);
    const Scaled cphi{cross, cplx(std::cos(p.phi), 0)};
    const double log_d1 = log_abs_diff(scaled_cosh(cplx(2 * r2 * a * P * x1, 0)), cphi);
    const double log_d2 = log_abs_diff(scaled_cosh(cplx(2 * r2 * a * P * x2, 0)), cphi);
    // a node of the position density carries no coherence
    if (std::isinf(log_d1) || std::isinf(log_d2)) return 0.0;
    return std::exp(log_num - 0.5 * (log_d1 + log_d2));
}

double coherence_qcmap(double x1, double x2, const CatParams& p) {
    const double P = p.purity();
    const double a = std::abs(p.alpha);
    const double k = inv_two_xi2(P);
    const double xb = 0.5 * (x1 + x2), dx = x1 - x2;
    const double r2 = std::sqrt(2.0);
    const Scaled num_a = times_exp(scaled_cosh(cplx(2 * r2 * a * P * xb, 0)), -k * dx * dx);
    const Scaled num_b = times_exp(scaled_cosh(cplx(r2 * a * P * dx, -p.phi)), -k * 4 * xb * xb);
    const double log_num = log_abs_diff(num_a, num_b);
    auto log_den = [&](double x) {
        return log_abs_diff(scaled_cosh(cplx(2 * r2 * a * P * x, 0)),
                            Scaled{-2 * k * 2 * x * x, cplx(std::cos(p.phi), 0)});
    };
    const double d1 = log_den(x1), d2 = log_den(x2);
    if (std::isinf(d1) || std::isinf(d2)) return 0.0;
    return std::exp(log_num - 0.5 * (d1 + d2));
}

double coherence_approx(double x1, double x2, const CatParams& p, CatVariant variant, ApproxForm form) {
    const double P = p.purity();
    if (P > 0.5) spdlog::warn("coherence approximation used outside its P << 1 regime (P={:.3f})", P);
    const double a = std::abs(p.alpha);
    const double r2a = std::sqrt(2.0) * a;
    if (form == ApproxForm::Indicator) {
        const double s = x1 * x2;
        if (variant == CatVariant::qcMAP) return coherence_thermal(std::abs(x1), std::abs(x2), p.n_th);
        if (s > 0) return coherence_thermal(x1, x2, p.n_th);
        if (s < 0) return coherence_thermal(std::abs(x1 - x2), 2 * r2a, p.n_th);
        return 0.0;
    }
    const double k = inv_two_xi2(P);
    const double xb = 0.5 * (x1 + x2), dx = x1 - x2;
    const double u = 2 * r2a * P * (std::abs(dx) - 2 * std::abs(xb));
    // 1/sqrt(1+e^u) computed without overflow
    auto sig = [](double v) { return v > 0 ? std::exp(-0.5 * v) / std::sqrt(1 + std::exp(-v)) : 1 / std::sqrt(1 + std::exp(v)); };
    const double first = std::exp(-k * dx * dx) * sig(u);
    double second_num;
    if (variant == CatVariant::qcMAP) {
        second_num = std::exp(-k * 4 * xb * xb);
    } else {
        const double t = std::abs(dx) - 2 * r2a;
        second_num = std::exp(-k * t * t);
    }
    return first + second_num * sig(-u);
}

double timing_error_wigner(cplx beta, const CatParams& p, const TimingErrorParams& te) {
    const double ct = te.chi_qc * te.tau;
    const double n = p.n_th;
    const cplx a = p.alpha;
    const cplx eip = std::exp(cplx(0, ct)), emi = std::exp(cplx(0, -ct));
    const double varphi =
        p.phi + 2 * std::imag(std::conj(a) * beta * (1.0 + emi)) + std::norm(a) * std::sin(ct);
    const cplx den = 1.0 + n * (1.0 - eip);
    const cplx tr = std::exp(-(0.5 + n * eip / den) * std::norm(2.0 * beta + a * (eip - 1.0))) / den;
    return 0.5 * (thermal_wigner(beta - a, n) + thermal_wigner(-a - beta * emi, n) -
                  4 / kPi * std::real(std::exp(cplx(0, varphi)) * tr));
}

// First order of the n e^{i chi tau}/(1 + n(1 - e^{i chi tau})) factor in the
// trace. The sign is negative; expanding the exact form confirms it (the
// remaining error then shrinks as tau^2).
double timing_error_bending_coefficient(const CatParams& p, const TimingErrorParams& te) {
    return -4 * te.chi_qc * te.tau * p.n_th * (1 + p.n_th);
}

double timing_error_wigner_linearized(cplx beta, const CatParams& p, const TimingErrorParams& te) {
    const double ct = te.chi_qc * te.tau;
    const double n = p.n_th;
    const double a = std::abs(p.alpha);
    const cplx k(-ct / 2, 1.0);
    const double phip = p.phi + ct * (a * a + n);
    const double arg = 4 * a * std::real(std::conj(k) * beta) + phip +
                       timing_error_bending_coefficient(p, te) * std::norm(beta);
    const double coh =
        4 / kPi * std::cos(arg) * std::exp(-2 * (2 * n + 1) * (std::norm(beta) + ct * a * beta.imag()));
    const cplx emi = std::exp(cplx(0, -ct));
    return 0.5 * (thermal_wigner(beta - a, n) + thermal_wigner(-a - beta * emi, n) - coh);
}

MarginalOptions default_marginal_options(double alpha_abs, double n_th, int n_samples) {
    const double P = purity_from_nth(n_th);
    const double pmin = std::min(P, 1.0 / P);
    MarginalOptions o;
    o.re_half_width = alpha_abs + 6.0 / std::sqrt(2 * pmin);
    o.im_half_width = o.re_half_width;
    o.n_samples = n_samples;
    const double period = alpha_abs > 0 ? kPi / (2 * alpha_abs) : 1.0;
    o.re_step = std::min(period / 16, 0.05);
    return o;
}

Marginal marginal_im(const WignerFn& w, const MarginalOptions& opt) {
    if (opt.n_samples < 2 || !(opt.re_half_width > 0) || !(opt.im_half_width > 0) || !(opt.re_step > 0))
        throw ValidationError("marginal options must be positive with at least 2 samples");
    const int nx = static_cast<int>(std::ceil(2 * opt.re_half_width / opt.re_step)) + 1;
    const double hx = 2 * opt.re_half_width / (nx - 1);
    Marginal m;
    m.spacing = 2 * opt.im_half_width / (opt.n_samples - 1);
    m.im_beta.resize(opt.n_samples);
    m.density.resize(opt.n_samples);
    double boundary = 0;
    for (int j = 0; j < opt.n_samples; ++j) {
        const double y = -opt.im_half_width + j * m.spacing;
        m.im_beta[j] = y;
        double s = 0;
        for (int i = 0; i < nx; ++i) {
            const double x = -opt.re_half_width + i * hx;
            const double v = w(cplx(x, y));
            s += (i == 0 || i == nx - 1) ? 0.5 * v : v;
            if (i == 0 || i == nx - 1) boundary = std::max(boundary, std::abs(v));
        }
        m.density[j] = s * hx;
    }
    for (double x : {-opt.re_half_width, opt.re_half_width}) {
        boundary = std::max(boundary, std::abs(w(cplx(x, -opt.im_half_width))));
        boundary = std::max(boundary, std::abs(w(cplx(x, opt.im_half_width))));
    }
    for (int i = 0; i < nx; ++i) {
        const double x = -opt.re_half_width + i * hx;
        boundary = std::max(boundary, std::abs(w(cplx(x, -opt.im_half_width))));
        boundary = std::max(boundary, std::abs(w(cplx(x, opt.im_half_width))));
    }
    if (boundary >= 1e-6)
        throw ConvergenceError("Wigner function has not decayed at the integration box edge (max " +
                               std::to_string(boundary) + ")");
    double total = 0;
    for (int j = 0; j < opt.n_samples; ++j)
        total += (j == 0 || j == opt.n_samples - 1 ? 0.5 : 1.0) * m.density[j] * m.spacing;
    for (double& d : m.density) d /= total;
    return m;
}

FringePeak dominant_fringe(const Marginal& m) {
    const int n = static_cast<int>(m.density.size());
    if (n < 8) throw InsufficientData("marginal too short for a spectrum");
    Eigen::FFT<double> fft;
    std::vector<double> in(m.density.begin(), m.density.end());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    std::vector<double> mag(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) mag[k] = std::abs(out[k]);
    int best = -1;
    for (int k = 1; k < n / 2; ++k) {
        if (mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1] && (best < 0 || mag[k] > mag[best])) best = k;
    }
    if (best < 0) throw ConvergenceError("no spectral peak above the zero bin");
    FringePeak f;
    f.bin = best;
    const double length = n * m.spacing;
    f.frequency = 2 * kPi * best / length;
    f.period = length / best;
    return f;
}

}  // namespace hotcat
