#pragma once

#include <string>
#include <vector>

#include "hotcat/fockspace.hpp"
#include "hotcat/protocols.hpp"

namespace hotcat {

// Rates in 1/s, frequencies in rad/s. Interaction frame:
//   H = delta n - chi n|e><e| - (K/2 + chi'/2 |e><e|) c+c+cc - (K'/6) c+c+c+ccc
struct HamiltonianParams {
    double chi_qc = 0;
    double K_c = 0;
    double chi_qc_prime = 0;
    double K_c_prime = 0;
    double gamma_1 = 0;
    double gamma_2 = 0;
    double Gamma = 0;
    double n_th_bath = 0;
    double delta = 0;  // cavity detuning

    // table values of the device; K' left at 0 as in the dynamics default
    static HamiltonianParams experimental();
    // ideal-protocol comparison: no nonlinearity, no decoherence
    static HamiltonianParams reference();
    void validate() const;
    double energy(int q, int n) const;
};

struct PulseSegment {
    enum class Kind { Displacement, FreeEvolution, QubitPulse };
    Kind kind = Kind::FreeEvolution;
    double start = 0;     // s
    double duration = 0;  // s; 0 for an instantaneous displacement
    cplx beta{0, 0};      // Displacement
    double theta = 0;     // QubitPulse area
    double sigma = 0;     // QubitPulse width, duration = 4 sigma
    double phase = 0;     // QubitPulse drive phase
    std::string label;

    static PulseSegment displacement(double start, cplx beta, double duration = 0, std::string label = "");
    static PulseSegment free_evolution(double start, double duration, std::string label = "");
    // drive of area theta and phase phi, realizing R(-theta, cos phi e_x + sin phi e_y)
    static PulseSegment qubit_pulse(double start, double theta, double sigma, double phase, std::string label = "");
    double end() const { return start + duration; }
    double peak_time() const { return start + duration / 2; }
};

struct Timeline {
    Protocol variant = Protocol::qcMAP;
    std::vector<PulseSegment> segments;
    double total_duration() const;
    void validate() const;  // ordering, no overlap, pulse durations
};

// Omega(t) for a QubitPulse segment; zero outside the window
double drive_envelope(double t, const PulseSegment& seg);
double drive_peak(const PulseSegment& seg);

struct IntegratorOptions {
    double step_scale = 1.0;  // fraction of the default step bound
    double max_step = 0;      // explicit step in s; must respect the bound
    double leakage_tol = 1e-6;
};

struct EvolveStats {
    long steps = 0;
    double max_leakage = 0;
};

// step bound used for a segment (s); +inf when the segment is solved exactly
double step_bound(const HamiltonianParams& params, const PulseSegment& seg, int dim);

JointState lindblad_evolve(const JointState& state, const HamiltonianParams& params, const PulseSegment& seg,
                           const IntegratorOptions& opt = {}, EvolveStats* stats = nullptr);

struct ScheduleOptions {
    double displacement_duration = 0;  // 0: instantaneous
    // Rotate/rescale the displacements around finite pulses so the lobes land
    // at +-alpha, and correct the pi/2 phase so the fringes sit where an
    // instantaneous circuit would put them.
    bool compensate = true;
    // added in order to each free-evolution duration
    std::vector<double> free_offsets;
};

Timeline schedule_protocol(Protocol variant, cplx alpha, double phi, double sigma_disentangle, double sigma_qubit,
                           double chi_qc, const ScheduleOptions& opt = {});

// Coherent-branch bookkeeping for a vacuum input: each branch is a qubit
// level, a coherent amplitude and a complex weight. Pulses act as
// T(2 sigma) R T(2 sigma); the selective pulse flips only the branch nearest
// the origin.
struct TrackedBranch {
    int qubit = 0;
    cplx beta{0, 0};
    cplx weight{1, 0};
};
std::vector<TrackedBranch> track_branches(const Timeline& tl, double chi_qc, cplx start = {0, 0});

JointState simulate_protocol(Protocol variant, const CavityState& initial, const HamiltonianParams& params,
                             const Timeline& timeline, const IntegratorOptions& opt = {},
                             EvolveStats* stats = nullptr);

// top-10% Fock population of a joint state
double fock_leakage(const JointState& s);

}  // namespace hotcat
