#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hotcat/analytic.hpp"
#include "hotcat/dynamics.hpp"
#include "hotcat/tomography.hpp"

namespace hotcat {

enum class Mode { Analytic, Ideal, Dynamics, FitWignerScale, FitThermal, FitHamiltonian };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);  // ValidationError("mode") when unknown or empty
std::string to_string(Protocol p);

struct LinecutSpec {
    std::string axis = "re";  // re | im
    double min = -1, max = 1;
    int n = 2;
    double offset = 0;  // value of the other quadrature
    bool operator==(const LinecutSpec&) const = default;
};

struct MarginalSpec {
    int n_samples = 1024;
    bool operator==(const MarginalSpec&) const = default;
};

// Values are kept in the units of the file (Hz for *_hz keys); conversion to
// rad/s happens in hamiltonian().
struct HamiltonianConfig {
    std::string preset = "experimental";  // experimental | reference
    std::optional<double> chi_qc_hz, K_c_hz, chi_qc_prime_hz, K_c_prime_hz, delta_hz;
    std::optional<double> gamma_1, gamma_2, Gamma, n_th_bath;
    HamiltonianParams build() const;
    bool operator==(const HamiltonianConfig&) const = default;
};

struct PulseConfig {
    double sigma_disentangle = 20e-9;
    double sigma_qubit = 6e-9;
    double displacement_duration = 0;
    bool compensate = true;
    std::vector<double> free_offsets;
    bool operator==(const PulseConfig&) const = default;
};

struct FitConfig {
    std::string input;  // CSV path, relative to the config file
    std::string kerr_convention = "consistent";  // consistent | literal
    double f0_hz = 0, spacing_hz = 0, linewidth_hz = 0;  // spectrum input only
    int n_peaks = 12;
    double residual_threshold = 0;  // 0: no threshold
    bool operator==(const FitConfig&) const = default;
};

struct RunConfig {
    Mode mode = Mode::Analytic;
    Protocol variant = Protocol::qcMAP;
    double alpha = 3, phi = kPi, n_th = 0;
    int dim = 0;  // 0: chosen from alpha and n_th
    unsigned seed = 0;
    bool normalize = false;  // analytic: divide by the trace of S rho S^dag
    std::optional<GridSpec> grid;
    std::optional<LinecutSpec> linecut;
    std::optional<MarginalSpec> marginal;
    HamiltonianConfig hamiltonian;
    PulseConfig pulses;
    double step_scale = 1.0;
    std::optional<double> timing_tau;
    FitConfig fit;
    bool heatmap = false;

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

// YAML text. ParseError on syntax, type errors and unknown keys (with line and
// key); ValidationError naming the violated invariant.
// `fallback` supplies the mode when the text leaves it out (CLI positional).
RunConfig parse_config(const std::string& text, std::optional<Mode> fallback = std::nullopt);
std::string serialize_config(const RunConfig& c);

}  // namespace hotcat
