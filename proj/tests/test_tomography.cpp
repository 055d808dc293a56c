#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hotcat/analytic.hpp"
#include "hotcat/fockspace.hpp"
#include "hotcat/tomography.hpp"

using namespace hotcat;

namespace {

// |psi> = sqrt(1 - pe)|a>|g> + sqrt(pe)|b>|e>
JointState entangled(cplx a, cplx b, double pe, int dim) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * dim);
    psi.head(dim) = std::sqrt(1 - pe) * displacement(a, dim).matrix().col(0);
    psi.tail(dim) = std::sqrt(pe) * displacement(b, dim).matrix().col(0);
    return JointState(dim, psi * psi.adjoint());
}

RawDataGrid synth_raw(double cw, double ci, double cq, double noise, unsigned seed) {
    RawDataGrid raw;
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double scale = 2 / kPi / cw;  // largest |D|
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j) {
            const double I = -11 + 0.55 * i, Q = -11 + 0.55 * j;
            raw.I.push_back(I);
            raw.Q.push_back(Q);
            raw.D.push_back(fock1_wigner(cplx(ci * I, cq * Q)) / cw + noise * scale * nd(rng));
        }
    return raw;
}

std::vector<double> geometric(double n_th, int n) {
    std::vector<double> w;
    for (int k = 0; k < n; ++k) w.push_back(std::pow(n_th, k) / std::pow(n_th + 1, k + 1));
    return w;
}

}  // namespace

TEST_CASE("measurement expectation") {
    const int dim = 40;
    const CavityState c = coherent_state(cplx(0.7, -0.4), dim);
    for (cplx b : {cplx(0, 0), cplx(0.7, -0.4), cplx(-1, 0.5)}) {
        CHECK(measurement_expectation(product_state(c, ground_projector()), b) ==
              doctest::Approx(wigner_numeric(c, b)).epsilon(1e-12));
        CHECK(measurement_expectation(product_state(c, excited_projector()), b) ==
              doctest::Approx(-wigner_numeric(c, b)).epsilon(1e-12));
    }
    const JointState s = entangled(cplx(1.2, 0), cplx(-0.5, 0.8), 0.1, dim);
    const Conditional cond = qubit_conditional(s);
    CHECK(cond.p_e == doctest::Approx(0.1).epsilon(1e-12));
    for (cplx b : {cplx(0, 0), cplx(1.2, 0), cplx(-0.5, 0.8), cplx(0.3, 0.3)}) {
        const double want = 0.9 * wigner_numeric(cond.g(), b) - 0.1 * wigner_numeric(cond.e(), b);
        CHECK(std::abs(measurement_expectation(s, b) - want) < 1e-12);
    }
    CHECK_THROWS_AS(measurement_expectation(s, cplx(4, 0)), TruncationError);
}

TEST_CASE("wigner map") {
    const int dim = 20;
    GridSpec g;
    g.re_min = g.im_min = -0.5;
    g.re_max = g.im_max = 0.5;
    g.n_re = g.n_im = 3;
    const WignerGrid w = wigner_map(thermal_state(0.0, dim), g);
    REQUIRE(w.values.size() == 9);
    // Re runs fastest
    CHECK(w.points[1] == cplx(0, -0.5));
    CHECK(w.points[3] == cplx(-0.5, 0));
    for (size_t k = 0; k < 9; ++k)
        CHECK(w.values[k] == doctest::Approx(2 / kPi * std::exp(-2 * std::norm(w.points[k]))).epsilon(1e-12));

    GridSpec big;
    big.re_min = big.im_min = -2;
    big.re_max = big.im_max = 2;
    big.n_re = 21;
    big.n_im = 17;
    const JointState s = entangled(cplx(1, 0.5), cplx(-1, 0), 0.3, 48);
    const WignerGrid serial = wigner_map(s, big, 1), par = wigner_map(s, big, 4);
    CHECK(serial.values == par.values);
    CHECK(serial.values.size() == 21 * 17);

    GridSpec bad = g;
    bad.n_re = 1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = g;
    bad.re_max = bad.re_min;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("Fock-1 Wigner") {
    CHECK(fock1_wigner(0) == doctest::Approx(-2 / kPi).epsilon(1e-15));
    const CavityState f1 = fock_state(1, 30);
    for (cplx b : {cplx(0.3, 0), cplx(0.5, 0.5), cplx(-1, 0.2)})
        CHECK(fock1_wigner(b) == doctest::Approx(wigner_numeric(f1, b)).epsilon(1e-12));
}

TEST_CASE("Wigner scale calibration") {
    SUBCASE("noiseless") {
        const RawDataGrid raw = synth_raw(1.7, 0.23, 0.21, 0.0, 1);
        const FitResult r = calibrate_wigner_scale(raw);
        CHECK(r.residual_norm < 1e-10);
        CHECK(r.at("chi_W") == doctest::Approx(1.7).epsilon(1e-8));
        CHECK(r.at("chi_I") == doctest::Approx(0.23).epsilon(1e-8));
        CHECK(r.at("chi_Q") == doctest::Approx(0.21).epsilon(1e-8));
        // the centre value after calibration
        const size_t origin = 20 * 41 + 20;
        REQUIRE(std::abs(raw.I[origin]) < 1e-12);
        REQUIRE(std::abs(raw.Q[origin]) < 1e-12);
        CHECK(raw.D[origin] * r.at("chi_W") == doctest::Approx(-2 / kPi).epsilon(1e-8));
    }
    SUBCASE("one percent noise") {
        for (unsigned seed : {1u, 2u, 3u}) {
            const FitResult r = calibrate_wigner_scale(synth_raw(1.7, 0.23, 0.21, 0.01, seed));
            CHECK(r.at("chi_W") == doctest::Approx(1.7).epsilon(0.03));
            CHECK(r.at("chi_I") == doctest::Approx(0.23).epsilon(0.03));
            CHECK(r.at("chi_Q") == doctest::Approx(0.21).epsilon(0.03));
        }
    }
    SUBCASE("scaling the data rescales chi_W") {
        RawDataGrid raw = synth_raw(1.7, 0.23, 0.21, 0.0, 1);
        const double w0 = calibrate_wigner_scale(raw).at("chi_W");
        for (double& d : raw.D) d *= 2.5;
        CHECK(calibrate_wigner_scale(raw).at("chi_W") == doctest::Approx(w0 / 2.5).epsilon(1e-9));
    }
    SUBCASE("errors") {
        RawDataGrid raw = synth_raw(1.7, 0.23, 0.21, 0.0, 1);
        RawDataGrid flat = raw;
        for (double& d : flat.D) d = 0.2;
        CHECK_THROWS_AS(calibrate_wigner_scale(flat), DegenerateData);
        RawDataGrid pos = raw;
        for (double& d : pos.D) d = std::abs(d) + 0.01;
        CHECK_THROWS_AS(calibrate_wigner_scale(pos), ValidationError);
        RawDataGrid ragged = raw;
        ragged.D.pop_back();
        CHECK_THROWS_AS(calibrate_wigner_scale(ragged), ValidationError);
    }
}

TEST_CASE("thermal occupation fit") {
    CHECK(fit_thermal_occupation(geometric(3.3, 25)).at("n_th") == doctest::Approx(3.3).epsilon(1e-9));
    CHECK(fit_thermal_occupation({1, 0, 0, 0, 0}).at("n_th") == 0.0);
    // overall normalization does not matter
    std::vector<double> w = geometric(1.44, 15);
    const double n0 = fit_thermal_occupation(w).at("n_th");
    for (double& x : w) x *= 37.0;
    CHECK(fit_thermal_occupation(w).at("n_th") == doctest::Approx(n0).epsilon(1e-12));
    // zero peaks are skipped
    std::vector<double> gap = geometric(2.0, 10);
    gap[4] = 0;
    CHECK(fit_thermal_occupation(gap).at("n_th") == doctest::Approx(2.0).epsilon(1e-9));

    CHECK_THROWS_AS(fit_thermal_occupation({1, 0}), InsufficientData);
    CHECK_THROWS_AS(fit_thermal_occupation({0, 0, 0}), DegenerateData);
    CHECK_THROWS_AS(fit_thermal_occupation({1, -1, 0}), ValidationError);
    CHECK_THROWS_AS(fit_thermal_occupation({1, 2, 4}), ConvergenceError);
    CHECK_THROWS_AS(fit_thermal_occupation({1, 0.5, 0.2}, {1, 1}), ValidationError);
}

TEST_CASE("thermal fit under multiplicative noise") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd(0.0, 0.05);
    const std::vector<double> w0 = geometric(7.6, 40);
    int inside = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w = w0;
        for (double& x : w) x *= 1 + nd(rng);
        if (std::abs(fit_thermal_occupation(w).at("n_th") - 7.6) <= 0.4) ++inside;
    }
    CHECK(inside >= 95);
}

TEST_CASE("peak weights from a spectrum") {
    std::vector<double> f;
    for (int k = 0; k < 1200; ++k) f.push_back(-30e6 + k * 25e3);
    const double spacing = 1.499e6, lw = 0.15e6;
    const std::vector<double> sig = thermal_spectrum(f, 3.3, 0.0, spacing, lw, 16);
    const PeakWeights pw = peak_weights_from_spectrum(f, sig, 0.0, spacing, lw, 16);
    REQUIRE(pw.weights.size() == 16);
    REQUIRE(pw.sigma.size() == 16);
    const std::vector<double> want = geometric(3.3, 16);
    for (int n = 0; n < 16; ++n) CHECK(pw.weights[n] == doctest::Approx(want[n]).epsilon(1e-8));
    CHECK(fit_thermal_occupation(pw.weights).at("n_th") == doctest::Approx(3.3).epsilon(1e-6));
    CHECK_THROWS_AS(peak_weights_from_spectrum(f, sig, 0.0, spacing, lw, 2), InsufficientData);
}

TEST_CASE("frequency shift fit") {
    const double delta = 2 * kPi * 6e6, K = 2 * kPi * 4.9e3, Kp = 2 * kPi * 14.0;
    std::vector<double> b2 = {1.75, 3.5, 5.75, 8.5, 11.75}, om;
    for (double x : b2) om.push_back(delta - K * x - Kp * x * x / 2);
    const FitResult r = fit_frequency_shifts(b2, om);
    CHECK(r.residual_norm < 1e-10 * delta);
    CHECK(r.at("delta") == doctest::Approx(delta).epsilon(1e-10));
    CHECK(r.at("K_c") == doctest::Approx(K).epsilon(1e-8));
    CHECK(r.at("K_c_prime") == doctest::Approx(Kp).epsilon(1e-5));
    // the literal convention reads the same data with K/2 and K'/6
    const FitResult l = fit_frequency_shifts(b2, om, KerrConvention::Literal);
    CHECK(l.at("K_c") == doctest::Approx(2 * K).epsilon(1e-8));
    CHECK(l.at("K_c_prime") == doctest::Approx(3 * Kp).epsilon(1e-5));
    // detuning only: flat
    const FitResult d = fit_frequency_shifts(b2, std::vector<double>(5, delta));
    CHECK(std::abs(d.at("K_c")) < 1e-9 * delta);
    CHECK(std::abs(d.at("K_c_prime")) < 1e-9 * delta);
    CHECK_THROWS_AS(fit_frequency_shifts({1, 1, 2}, {1, 1, 1}), InsufficientData);
}

TEST_CASE("revival fit recovers the rotation frequency") {
    HamiltonianParams hp;
    hp.delta = 2 * kPi * 6e6;
    hp.Gamma = 1 / 110e-6;
    std::vector<double> t;
    for (int k = 0; k <= 200; ++k) t.push_back(k * 2.5e-9);
    const RevivalSeries s = synthesize_revival(hp, 1.5, 0, t, 40);
    CHECK(s.p.front() == doctest::Approx(1.0).epsilon(1e-9));
    const RevivalFit f = fit_revival(s);
    CHECK(f.converged);
    CHECK(f.omega == doctest::Approx(hp.delta).epsilon(1e-4));
    RevivalSeries short_s = s;
    short_s.t.resize(20);
    short_s.p.resize(20);
    CHECK_THROWS_AS(fit_revival(short_s), InsufficientData);
}

TEST_CASE("Hamiltonian round trip") {
    auto hp = HamiltonianParams::experimental();
    hp.delta = 2 * kPi * 6e6;
    hp.K_c_prime = 2 * kPi * 14.0;
    std::vector<double> t;
    for (int k = 0; k <= 250; ++k) t.push_back(k * 2e-9);
    std::vector<RevivalSeries> data;
    for (int q : {0, 1})
        for (double b : {1.5, 2.5, 3.5}) data.push_back(synthesize_revival(hp, b, q, t, 80));
    const FitResult r = fit_hamiltonian(data);
    CHECK(r.at("K_c") == doctest::Approx(hp.K_c).epsilon(0.02));
    CHECK(r.at("chi_qc") == doctest::Approx(hp.chi_qc).epsilon(0.005));
    CHECK(r.at("delta") == doctest::Approx(hp.delta).epsilon(1e-3));
    CHECK(r.parameters.count("omega_g_0") == 1);
    CHECK(r.parameters.count("omega_e_2") == 1);
    CHECK_THROWS_AS(fit_hamiltonian({}), InsufficientData);
}
