#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hotcat/dynamics.hpp"
#include "hotcat/fockspace.hpp"
#include "hotcat/optimize.hpp"

namespace hotcat {

// Rectangular grid; points are ordered with Re(beta) running fastest.
struct GridSpec {
    double re_min = -1, re_max = 1, im_min = -1, im_max = 1;
    int n_re = 2, n_im = 2;
    void validate() const;
    std::vector<cplx> points() const;
    bool operator==(const GridSpec&) const = default;
};

struct GridMeta {
    double alpha = 0, n_th = 0, phi = 0;
    std::string variant;
    std::string params_hash;
};

struct WignerGrid {
    GridSpec spec;
    std::vector<cplx> points;
    std::vector<double> values;
    GridMeta meta;
};

// p_g W_g(beta) - p_e W_e(beta) = Tr{M(beta) rho}
double measurement_expectation(const JointState& s, cplx beta);

// Evaluate f at every point with up to `jobs` threads (0: hardware
// concurrency). Each value is computed independently, so the result does not
// depend on the thread count.
std::vector<double> parallel_map(const std::vector<cplx>& points, const std::function<double(cplx)>& f,
                                 unsigned jobs = 0);

WignerGrid wigner_map(const JointState& s, const GridSpec& spec, unsigned jobs = 0);
WignerGrid wigner_map(const CavityState& s, const GridSpec& spec, unsigned jobs = 0);

struct RawDataGrid {
    std::vector<double> I, Q, D;
    void validate() const;
};

struct FitResult {
    std::map<std::string, double> parameters;
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
    double at(const std::string& key) const;
};

struct FitOptions {
    SimplexOptions simplex;
    // converged additionally requires residual_norm <= this
    double residual_threshold = std::numeric_limits<double>::infinity();
};

// W of the one-photon Fock state
double fock1_wigner(cplx beta);

// D = W_1(chi_I I + i chi_Q Q) / chi_W; parameters chi_W, chi_I, chi_Q
FitResult calibrate_wigner_scale(const RawDataGrid& raw, const FitOptions& opt = {});

// Geometric fit p_n ~ r^n by log-linear regression; parameter n_th (and
// ratio r). Zero weights are ignored. Without `sigma` the log residuals count
// equally (multiplicative noise); with it each is weighted by w_n / sigma_n.
FitResult fit_thermal_occupation(const std::vector<double>& weights, const std::vector<double>& sigma = {});

// Amplitudes of Lorentzian peaks at f0 - n*spacing (number-split qubit
// spectroscopy, higher photon numbers pull the qubit down), solved by linear
// least squares and clipped at zero.
struct PeakWeights {
    std::vector<double> weights;
    std::vector<double> sigma;  // standard errors from the residual scatter
};
PeakWeights peak_weights_from_spectrum(const std::vector<double>& freq, const std::vector<double>& signal,
                                               double f0, double spacing, double linewidth, int n_peaks);

// Sum of Lorentzians of half width `linewidth` weighted by a thermal distribution
std::vector<double> thermal_spectrum(const std::vector<double>& freq, double n_th, double f0, double spacing,
                                     double linewidth, int n_peaks);

// Revival measurement: prepare |beta> with the qubit in `qubit`, wait t,
// displace back and record the vacuum probability.
struct RevivalSeries {
    double beta = 0;  // |beta|
    int qubit = 0;
    std::vector<double> t;
    std::vector<double> p;
};

// How the stage-2 polynomial coefficients map to Kerr constants.
//   Consistent: omega = Delta - K|b|^2 - K'|b|^4/2 (mean field of the model Hamiltonian)
//   Literal:    omega = Delta - K|b|^2/2 - K'|b|^4/6
enum class KerrConvention { Consistent, Literal };

struct RevivalFit {
    double omega = 0;  // rad/s, taken positive
    double decay = 0;  // 1/s
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
};

// stage 2 alone: omega(|b|^2) = c0 + c1 |b|^2 + c2 |b|^4 by linear least
// squares; parameters delta, K_c, K_c_prime. Needs >= 3 distinct |b|^2.
FitResult fit_frequency_shifts(const std::vector<double>& beta2, const std::vector<double>& omega,
                               KerrConvention conv = KerrConvention::Consistent);

// stage 1: P = exp{-2|b|^2 [1 - cos(omega t)] - decay t}
RevivalFit fit_revival(const RevivalSeries& s, const FitOptions& opt = {});

// Stage 2 per qubit level (keys delta, K_c, K_c_prime, suffixed _g / _e when
// both are present) and the dispersive terms chi_qc, chi_qc_prime from the
// difference of the two levels. Stage 2 is evaluated at the effective photon
// number |beta|^2 - 1/2. Also reports omega_<q>_<i> for every series.
FitResult fit_hamiltonian(const std::vector<RevivalSeries>& data, KerrConvention conv = KerrConvention::Consistent,
                          const FitOptions& opt = {});

// Synthetic revival data from the master equation. Qubit rates are ignored
// (the qubit is a spectator); the cavity detuning sets the revival rate.
RevivalSeries synthesize_revival(const HamiltonianParams& params, double beta, int qubit,
                                 const std::vector<double>& times, int dim);

}  // namespace hotcat
