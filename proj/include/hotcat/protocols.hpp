#pragma once

#include <array>
#include <utility>
#include <vector>

#include "hotcat/fockspace.hpp"

namespace hotcat {

// Per-Fock qubit rotation modelling the number-selective pi pulse. The flip
// probability sin^2(a_n/2) follows exp{-(chi sigma n)^2}; axes are all e_x.
struct SelectivePulseModel {
    double sigma_t = 0;  // s
    double chi_qc = 0;   // rad/s
    int dim = 0;
    std::vector<double> angles;
    std::vector<std::array<double, 3>> axes;

    static SelectivePulseModel gaussian(double sigma_t, double chi_qc, int dim);
    double flip_probability(int n) const;
    int last_full_flip() const;   // N: largest n with flip probability > 0.99
    int first_no_flip() const;    // M: smallest n with flip probability < 0.01
};

// joint (2 dim) matrix of sum_n |n><n| R(a_n, u_n)
Mat selective_pulse_operator(const SelectivePulseModel& model);

enum class IdealOperator { S1, S1_prime, S2 };
enum class Protocol { ECD, qcMAP };

CavityOperator ideal_cat_operator(IdealOperator variant, cplx alpha, double phi, int dim);
// S rho S^dag renormalized by its trace
CavityState ideal_cat_state(IdealOperator variant, cplx alpha, double phi, const CavityState& initial);
// Tr{S rho S^dag} before renormalization
double ideal_cat_trace(IdealOperator variant, cplx alpha, double phi, const CavityState& initial);

// operator the protocol is equivalent to in the ideal limit
IdealOperator equivalent_operator(Protocol p);

// T(t) = |g><g| + exp(i chi t n)|e><e|, given the phase chi*t
Mat free_evolution_operator(double chi_t, int dim);

Mat protocol_unitary(Protocol p, cplx alpha, double phi, const SelectivePulseModel& pulse);

struct ProtocolReport {
    double p_g = 0;
    double p_e = 0;
    std::optional<CavityState> rho_g;
    std::optional<CavityState> rho_e;
    double off_diag_norm = 0;  // Frobenius norm of the g-e coherence blocks
    double s_gg_trace = 0;     // Tr{S_gg rho_0 S_gg^dag}
};

ProtocolReport make_report(const JointState& s);

std::pair<JointState, ProtocolReport> run_ideal_protocol(Protocol p, cplx alpha, double phi,
                                                         const CavityState& initial,
                                                         const SelectivePulseModel& pulse);

struct FockDistributions {
    RVec p_g;
    RVec p_e;
};
FockDistributions conditional_fock_distributions(const JointState& s);

// Tr{P_{>N} rho_T}
double thermal_tail(double n_th, int n);

}  // namespace hotcat
