#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "hotcat/analytic.hpp"
#include "hotcat/fockspace.hpp"
#include "hotcat/protocols.hpp"

using namespace hotcat;

namespace {

CatParams cat(double alpha, double n_th, double phi) {
    CatParams p;
    p.alpha = alpha;
    p.n_th = n_th;
    p.phi = phi;
    return p;
}

// W of S rho S^dag without renormalization, through the matrix route
double matrix_route(const Mat& s, const CavityState& rho, cplx beta) {
    return wigner_of_matrix(s * rho.rho() * s.adjoint(), beta);
}

}  // namespace

TEST_CASE("thermal Wigner and characteristic function") {
    CHECK(thermal_wigner(0.0, 0.0) == doctest::Approx(2 / kPi).epsilon(1e-15));
    CHECK(thermal_wigner(0.0, 2.0) == doctest::Approx(2 / (5 * kPi)).epsilon(1e-15));
    CHECK(thermal_charfn(0.0, 5.0) == 1.0);
    // Gaussian of the right width against the numeric state
    const CavityState t = thermal_state(1.7, 96);
    for (cplx b : {cplx(0.4, 0), cplx(-1, 1), cplx(0.2, 1.5)})
        CHECK(std::abs(thermal_wigner(b, 1.7) - wigner_numeric(t, b)) < 1e-10);
    // chi_T(xi) = Tr{D(xi) rho_T}
    const Mat d = displacement(cplx(0.6, -0.3), 96).matrix();
    CHECK(std::abs((d * t.rho()).trace() - thermal_charfn(cplx(0.6, -0.3), 1.7)) < 1e-10);
}

TEST_CASE("purity and coherence length") {
    CHECK(purity_from_nth(3.48) == doctest::Approx(1 / 7.96));
    CHECK(std::isinf(cat(3, 0, 0).xi_th()));
    const double P = purity_from_nth(2);
    CHECK(cat(3, 2, 0).xi_th() == doctest::Approx(std::sqrt(2 * P / (1 - P * P))));
    CHECK_THROWS_AS(cat(3, -1, 0).validate(), ValidationError);
}

TEST_CASE("ECD cat Wigner values") {
    const CatParams p = cat(3, 3.48, kPi);
    const double P = p.purity();
    const double expect = P / kPi * (2 * std::exp(-18 * P) + 2);
    CHECK(cat_wigner_ecd(0.0, p) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(std::abs(cat_wigner_ecd(0.0, p) - 0.0883) < 5e-4);
    const CavityState rho = thermal_state(3.48, 350);
    const Mat s1 = ideal_cat_operator(IdealOperator::S1, 3.0, kPi, 350).matrix();
    CHECK(std::abs(matrix_route(s1, rho, 0.0) - cat_wigner_ecd(0.0, p)) < 1e-8);

    const CatParams cold = cat(3, 0, kPi);
    CHECK(cat_wigner_ecd(3.0, cold) ==
          doctest::Approx((1 + std::exp(-72.0) + 2 * std::exp(-18.0)) / kPi).epsilon(1e-14));
}

TEST_CASE("qcMAP cat Wigner values") {
    for (double n : {0.0, 0.75, 3.48, 7.6}) CHECK(cat_wigner_qcmap(0.0, cat(12, n, kPi)) == doctest::Approx(2 / kPi));
    const CatParams p = cat(3, 3.48, 0);
    const double P = p.purity();
    CHECK(cat_wigner_qcmap(0.0, p) == doctest::Approx((2 * P * std::exp(-18 * P) - 2) / kPi).epsilon(1e-14));
    CHECK(std::abs(cat_wigner_qcmap(0.0, p) - (-0.6283)) < 5e-4);
    const CavityState rho = thermal_state(3.48, 350);
    const Mat s2 = ideal_cat_operator(IdealOperator::S2, 3.0, 0, 350).matrix();
    for (cplx b : {cplx(0, 0), cplx(0.3, 0.2), cplx(-2.5, 1)})
        CHECK(std::abs(matrix_route(s2, rho, b) - cat_wigner_qcmap(b, p)) < 1e-8);
}

TEST_CASE("cold limit makes the two forms identical") {
    for (double phi : {0.0, 1.0, kPi}) {
        const CatParams p = cat(2.5, 0, phi);
        double worst = 0;
        for (int i = 0; i < 41; ++i)
            for (int j = 0; j < 41; ++j) {
                const cplx b(-5 + 0.25 * i, -5 + 0.25 * j);
                worst = std::max(worst, std::abs(cat_wigner_qcmap(b, p) - cat_wigner_ecd(b, p)));
            }
        CHECK(worst < 1e-12);
        const CatParams q = cat(2.5, 1e-9, phi);
        CHECK(std::abs(cat_wigner_qcmap(cplx(0.3, 0.1), q) - cat_wigner_ecd(cplx(0.3, 0.1), q)) < 1e-8);
    }
}

TEST_CASE("normalized maps agree with the matrix route") {
    // a reduced version of the full oracle sweep
    for (double n : {0.0, 0.75, 2.0})
        for (double phi : {0.0, kPi / 2, kPi}) {
            const int dim = std::max(208, default_dim(2, n));
            const CavityState rho = thermal_state(n, dim);
            const CavityState c1 = ideal_cat_state(IdealOperator::S1, 2.0, phi, rho);
            const CavityState c2 = ideal_cat_state(IdealOperator::S2, 2.0, phi, rho);
            const CatParams p = cat(2, n, phi);
            double worst = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const cplx b(-5 + i, -5 + j);
                    worst = std::max(worst, std::abs(wigner_numeric(c1, b) - cat_wigner_normalized(b, p, CatVariant::ECD)));
                    worst = std::max(worst, std::abs(wigner_numeric(c2, b) - cat_wigner_normalized(b, p, CatVariant::qcMAP)));
                }
            CHECK(worst < 1e-5);
        }
}

TEST_CASE("normalization traces match the operator traces") {
    for (double phi : {0.0, 0.5, kPi}) {
        const CatParams p = cat(1.2, 1.0, phi);
        const CavityState rho = thermal_state(1.0, 96);
        CHECK(ideal_cat_trace(IdealOperator::S1, 1.2, phi, rho) == doctest::Approx(cat_trace_ecd(p)).epsilon(1e-10));
        CHECK(ideal_cat_trace(IdealOperator::S2, 1.2, phi, rho) == doctest::Approx(cat_trace_qcmap(p)).epsilon(1e-10));
    }
}

TEST_CASE("normalized maps integrate to one and stay bounded") {
    for (CatVariant v : {CatVariant::ECD, CatVariant::qcMAP}) {
        const CatParams p = cat(1.5, 0.75, 0.4);
        const double P = p.purity();
        const double half = 1.5 + 6 / std::sqrt(2 * P * std::min(P, 1.0));
        const double h = 0.04;
        const int n = static_cast<int>(std::ceil(2 * half / h));
        double sum = 0, lo = 1, hi = -1;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double w = cat_wigner_normalized(cplx(-half + i * h, -half + j * h), p, v);
                sum += ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0) * w;
                lo = std::min(lo, w);
                hi = std::max(hi, w);
            }
        CHECK(std::abs(sum * h * h - 1) < 1e-3);
        CHECK(hi <= 2 / kPi + 1e-12);
        CHECK(lo >= -2 / kPi - 1e-12);
    }
    // the unnormalized ECD form integrates to the trace
    const CatParams p = cat(3, 3.48, kPi);
    const double h = 0.05, half = 9;
    const int n = static_cast<int>(2 * half / h);
    double s = 0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            s += ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0) *
                 cat_wigner_ecd(cplx(-half + i * h, -half + j * h), p);
    CHECK(std::abs(s * h * h - cat_trace_ecd(p)) < 1e-3);
}

TEST_CASE("shifting phi by pi flips only the interference term") {
    for (double n : {0.0, 1.0, 3.48}) {
        const CatParams a = cat(2.2, n, 0.7), b = cat(2.2, n, 0.7 + kPi);
        const double P = a.purity();
        for (cplx x : {cplx(0, 0), cplx(1, 0.3), cplx(-2, 0.9)}) {
            const double lobes = 2 * P / kPi * (std::exp(-2 * P * std::norm(x - 2.2)) + std::exp(-2 * P * std::norm(x + 2.2)));
            CHECK(std::abs(cat_wigner_ecd(x, a) + cat_wigner_ecd(x, b) - lobes) < 1e-14);
            CHECK(std::abs(cat_wigner_qcmap(x, a) + cat_wigner_qcmap(x, b) - lobes) < 1e-14);
        }
    }
}

TEST_CASE("general formulas specialize to the thermal forms") {
    const double n = 1.3;
    auto w0 = [n](cplx b) { return thermal_wigner(b, n); };
    auto c0 = [n](cplx b) { return cplx(thermal_charfn(b, n)); };
    const cplx alpha(2.1, 0.4);
    const double phi = 0.9;
    CatParams p;
    p.alpha = alpha;
    p.n_th = n;
    p.phi = phi;
    for (cplx b : {cplx(0, 0), cplx(0.7, -0.2), cplx(-1.5, 1.1)}) {
        CHECK(std::abs(cat_wigner_general(b, alpha, phi, w0, c0, CatVariant::qcMAP) - cat_wigner_qcmap(b, p)) < 1e-12);
        CHECK(std::abs(cat_wigner_general(b, alpha, phi, w0, c0, CatVariant::ECD) - cat_wigner_ecd(b, p)) < 1e-12);
        CHECK(std::abs(cat_wigner_general(b, alpha, phi - 2 * std::norm(alpha), w0, c0, CatVariant::ECD_prime) -
                       cat_wigner_ecd(b, p)) < 1e-12);
    }
    auto vac = [](cplx b) { return thermal_wigner(b, 0); };
    auto vc = [](cplx b) { return cplx(thermal_charfn(b, 0)); };
    const cplx b(0.5, 0.25);
    const double cold = (std::exp(-2 * std::norm(b - alpha)) + std::exp(-2 * std::norm(b + alpha)) -
                         2 * std::cos(4 * std::imag(std::conj(alpha) * b) + phi) * std::exp(-2 * std::norm(b))) / kPi;
    CHECK(std::abs(cat_wigner_general(b, alpha, phi, vac, vc, CatVariant::ECD) - cold) < 1e-14);
}

TEST_CASE("general formulas on a non-isotropic input match the operators") {
    // coherent input |g> breaks the rotational symmetry of the thermal case
    const cplx g(0.6, -0.3);
    const int dim = 96;
    const CavityState rho = coherent_state(g, dim);
    auto w0 = [g](cplx b) { return 2 / kPi * std::exp(-2 * std::norm(b - g)); };
    // chi(xi) = <g|D(xi)|g>
    auto c0 = [g](cplx xi) { return std::exp(-0.5 * std::norm(xi) + xi * std::conj(g) - std::conj(xi) * g); };
    const cplx alpha(1.8, 0.5);
    const double phi = 0.4;
    const Mat s1 = ideal_cat_operator(IdealOperator::S1, alpha, phi, dim).matrix();
    const Mat s1p = ideal_cat_operator(IdealOperator::S1_prime, alpha, phi, dim).matrix();
    const Mat s2 = ideal_cat_operator(IdealOperator::S2, alpha, phi, dim).matrix();
    for (cplx b : {cplx(0, 0), cplx(0.5, 0.9), cplx(-1.2, -0.4), cplx(2, 0.3)}) {
        CHECK(std::abs(cat_wigner_general(b, alpha, phi, w0, c0, CatVariant::ECD) - matrix_route(s1, rho, b)) < 1e-9);
        CHECK(std::abs(cat_wigner_general(b, alpha, phi, w0, c0, CatVariant::ECD_prime) - matrix_route(s1p, rho, b)) <
              1e-9);
        CHECK(std::abs(cat_wigner_general(b, alpha, phi, w0, c0, CatVariant::qcMAP) - matrix_route(s2, rho, b)) < 1e-9);
    }
}

TEST_CASE("thermal coherence function") {
    for (double x : {-2.0, 0.0, 3.1}) CHECK(coherence_thermal(x, x, 3.48) == 1.0);
    CHECK(coherence_thermal(0.3, 2.4, 0) == 1.0);
    // depends only on the separation
    for (double s : {-1.0, 0.5, 4.0}) CHECK(coherence_thermal(1 + s, -0.5 + s, 2.0) == doctest::Approx(coherence_thermal(1, -0.5, 2.0)));
}

TEST_CASE("cat coherence saturates between the lobes") {
    const CatParams p = cat(3.5, 2, 0);
    const double x = std::sqrt(2.0) * 3.5;
    CHECK(std::abs(coherence_ecd(x, -x, p) - 1) < 1e-6);
    CHECK(std::abs(coherence_qcmap(x, -x, p) - 1) < 1e-6);
}

TEST_CASE("cat coherence stays in the unit interval") {
    for (double n : {0.0, 0.75, 3.48})
        for (double phi : {0.0, 1.3, kPi}) {
            const CatParams p = cat(3, n, phi);
            for (int i = -12; i <= 12; ++i)
                for (int j = -12; j <= 12; ++j) {
                    const double x1 = 0.5 * i, x2 = 0.5 * j;
                    for (double g : {coherence_ecd(x1, x2, p), coherence_qcmap(x1, x2, p)}) {
                        CHECK(g >= 0);
                        CHECK(g <= 1 + 1e-9);
                    }
                }
        }
}

TEST_CASE("cat coherence matches the position-basis density matrix") {
    // g = |<x1|rho|x2>| / sqrt(<x1|rho|x1><x2|rho|x2>), x = (c + c^dag)/sqrt(2) quadrature
    const int dim = 200;
    const double n = 0.75, phi = 0.6, a = 2.0;
    const CavityState rho = thermal_state(n, dim);
    const CavityState s1 = ideal_cat_state(IdealOperator::S1, a, phi, rho);
    const CavityState s2 = ideal_cat_state(IdealOperator::S2, a, phi, rho);
    // Hermite functions psi_k(x)
    auto wave = [dim](double x) {
        Eigen::VectorXcd v(dim);
        v(0) = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
        v(1) = std::sqrt(2.0) * x * v(0);
        for (int k = 2; k < dim; ++k) v(k) = std::sqrt(2.0 / k) * x * v(k - 1) - std::sqrt((k - 1.0) / k) * v(k - 2);
        return v;
    };
    auto g = [&](const CavityState& s, double x1, double x2) {
        const Eigen::VectorXcd u = wave(x1), v = wave(x2);
        const cplx off = u.dot(s.rho() * v);
        const double d1 = u.dot(s.rho() * u).real(), d2 = v.dot(s.rho() * v).real();
        return std::abs(off) / std::sqrt(d1 * d2);
    };
    const CatParams p = cat(a, n, phi);
    for (auto [x1, x2] : {std::pair{1.0, -1.5}, std::pair{2.5, -2.5}, std::pair{0.4, 2.2}, std::pair{-3.0, 1.0}}) {
        CHECK(std::abs(g(s1, x1, x2) - coherence_ecd(x1, x2, p)) < 1e-6);
        CHECK(std::abs(g(s2, x1, x2) - coherence_qcmap(x1, x2, p)) < 1e-6);
    }
}

TEST_CASE("qcMAP coherence follows the folded thermal function away from the axes") {
    const double n = (1 / 0.126 - 1) / 2;
    const CatParams p = cat(3, n, kPi);
    const double xi = p.xi_th();
    double worst = 0;
    for (int i = -40; i <= 40; ++i)
        for (int j = -40; j <= 40; ++j) {
            const double x1 = 0.2 * i, x2 = 0.2 * j;
            if (std::abs(x1) <= 2 * xi || std::abs(x2) <= 2 * xi) continue;
            worst = std::max(worst, std::abs(coherence_qcmap(x1, x2, p) - coherence_thermal(std::abs(x1), std::abs(x2), n)));
        }
    CHECK(worst < 0.02);
}

TEST_CASE("coherence approximations") {
    const CatParams p = cat(3, 3.48, 0);
    const double r = std::sqrt(2.0) * 3;
    for (ApproxForm f : {ApproxForm::Smooth, ApproxForm::Indicator})
        for (int k = 0; k <= 20; ++k) {
            const double s = k / 20.0;
            const double x1 = r * (2 * s - 1), x2 = -r;
            CHECK(coherence_approx(x1, x2, p, CatVariant::ECD, f) ==
                  doctest::Approx(coherence_approx(x1, x2, p, CatVariant::qcMAP, f)).epsilon(1e-12));
        }
    CHECK(coherence_approx(2.0, 2.0, p, CatVariant::ECD, ApproxForm::Indicator) == 1.0);
    CHECK(coherence_approx(2.0, 2.0, p, CatVariant::qcMAP, ApproxForm::Indicator) == 1.0);
    // the smooth form reaches 1 on the diagonal once inside the quadrant
    CHECK(std::abs(coherence_approx(9.0, 9.0, p, CatVariant::ECD) - 1) < 1e-6);

    const double xi = p.xi_th();
    double worst = 0;
    for (int i = -40; i <= 40; ++i)
        for (int j = -40; j <= 40; ++j) {
            const double x1 = 0.2 * i, x2 = 0.2 * j;
            if (std::abs(x1) <= 2 * xi || std::abs(x2) <= 2 * xi) continue;
            worst = std::max(worst, std::abs(coherence_approx(x1, x2, p, CatVariant::ECD) - coherence_ecd(x1, x2, p)));
            worst = std::max(worst, std::abs(coherence_approx(x1, x2, p, CatVariant::qcMAP) - coherence_qcmap(x1, x2, p)));
        }
    CHECK(worst < 0.05);
}

TEST_CASE("timing error reduces to the qcMAP form at tau = 0") {
    const CatParams p = cat(3, 3.48, 1.1);
    const TimingErrorParams te{0.0, 2 * kPi * 1.499e6};
    for (cplx b : {cplx(0, 0), cplx(1, -0.5), cplx(-2.5, 2)}) {
        CHECK(std::abs(timing_error_wigner(b, p, te) - cat_wigner_qcmap(b, p)) < 1e-12);
        CHECK(std::abs(timing_error_wigner_linearized(b, p, te) - cat_wigner_qcmap(b, p)) < 1e-12);
    }
}

TEST_CASE("timing error Wigner matches a lengthened free evolution") {
    // S(tau) = [1 - e^{i phi} Pi e^{i chi tau n}] D(alpha) / sqrt 2
    const double chi = 2 * kPi * 1.499e6, tau = 20e-9, n = 1.0, a = 2.0, phi = 0.8;
    const int dim = 160;
    const Mat d = displacement(a, dim).matrix();
    Mat rot = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) rot(k, k) = std::exp(kI * (chi * tau * k));
    const Mat s = (Mat::Identity(dim, dim) - std::exp(kI * phi) * parity(dim).matrix() * rot) * d / std::sqrt(2.0);
    const CavityState rho = thermal_state(n, dim);
    const CatParams p = cat(a, n, phi);
    for (cplx b : {cplx(0, 0), cplx(0.4, 0.3), cplx(-1.7, 0.5), cplx(1, -1)})
        CHECK(std::abs(timing_error_wigner(b, p, {tau, chi}) - matrix_route(s, rho, b)) < 1e-9);
}

TEST_CASE("fringe bending needs a hot state") {
    const TimingErrorParams te{20e-9, 2 * kPi * 1.499e6};
    CHECK(std::abs(timing_error_bending_coefficient(cat(3.47, 0, kPi), te)) < 1e-12);
    CHECK(timing_error_bending_coefficient(cat(3.47, 3.48, kPi), te) < 0);
}

TEST_CASE("linearized timing error is first order in tau") {
    // halving tau must cut the error about fourfold once tau is small
    const CatParams p = cat(3.47, 3.48, kPi);
    const double chi = 2 * kPi * 1.499e6;
    auto err = [&](double tau) {
        double worst = 0;
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                const cplx b(0.1 * i, 0.1 * j);
                if (std::abs(b) > 1) continue;
                worst = std::max(worst, std::abs(timing_error_wigner(b, p, {tau, chi}) -
                                                 timing_error_wigner_linearized(b, p, {tau, chi})));
            }
        return worst;
    };
    const double e1 = err(1e-9), e2 = err(0.5e-9);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("linearized timing error is close for small beta" * doctest::may_fail()) {
    const CatParams p = cat(3.47, 3.48, kPi);
    const TimingErrorParams te{20e-9, 2 * kPi * 1.499e6};
    double worst = 0;
    for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) {
            const cplx b(0.05 * i, 0.05 * j);
            if (std::abs(b) > 1) continue;
            worst = std::max(worst, std::abs(timing_error_wigner(b, p, te) - timing_error_wigner_linearized(b, p, te)));
        }
    CHECK(worst < 0.05 * 2 / kPi);
}

TEST_CASE("marginal of a qcMAP cat shows fringes at pi / 2 alpha") {
    const CatParams p = cat(3, 3.48, kPi);
    const Marginal m = marginal_im([&](cplx b) { return cat_wigner_normalized(b, p, CatVariant::qcMAP); },
                                   default_marginal_options(3, 3.48, 1024));
    double s = 0;
    for (double d : m.density) s += d * m.spacing;
    CHECK(std::abs(s - 1) < 1e-3);
    const FringePeak f = dominant_fringe(m);
    const double length = m.density.size() * m.spacing;
    const double expect = kPi / 6;
    // one bin either side
    CHECK(std::abs(f.period - expect) <= std::max(length / f.bin - length / (f.bin + 1), length / (f.bin - 1) - length / f.bin));
}

TEST_CASE("thermal marginal is a Gaussian of variance (2n+1)/4") {
    const double n = 1.5;
    const Marginal m = marginal_im([n](cplx b) { return thermal_wigner(b, n); }, default_marginal_options(0, n, 801));
    double mean = 0, var = 0, s = 0;
    for (size_t j = 0; j < m.density.size(); ++j) {
        s += m.density[j] * m.spacing;
        mean += m.im_beta[j] * m.density[j] * m.spacing;
    }
    for (size_t j = 0; j < m.density.size(); ++j) var += std::pow(m.im_beta[j] - mean, 2) * m.density[j] * m.spacing;
    CHECK(std::abs(s - 1) < 1e-3);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx((2 * n + 1) / 4).epsilon(1e-4));
    // pointwise against the Gaussian
    const double sd = std::sqrt((2 * n + 1) / 4);
    const size_t mid = m.density.size() / 2;
    CHECK(m.density[mid] == doctest::Approx(1 / (sd * std::sqrt(2 * kPi))).epsilon(1e-4));
}

TEST_CASE("marginal rejects a box the function has not decayed in") {
    MarginalOptions o;
    o.re_half_width = 1;
    o.im_half_width = 1;
    o.n_samples = 16;
    o.re_step = 0.1;
    CHECK_THROWS_AS(marginal_im([](cplx b) { return thermal_wigner(b, 3); }, o), ConvergenceError);
}
