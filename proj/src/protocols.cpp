#include "hotcat/protocols.hpp"

#include <cmath>

namespace hotcat {

SelectivePulseModel SelectivePulseModel::gaussian(double sigma_t, double chi_qc, int dim) {
    if (!(sigma_t >= 0) || dim < 2) throw ValidationError("selective pulse: sigma_t >= 0 and dim >= 2 required");
    SelectivePulseModel m;
    m.sigma_t = sigma_t;
    m.chi_qc = chi_qc;
    m.dim = dim;
    m.angles.resize(dim);
    m.axes.assign(dim, {1.0, 0.0, 0.0});
    for (int n = 0; n < dim; ++n) {
        const double x = chi_qc * sigma_t * n;
        m.angles[n] = 2.0 * std::asin(std::exp(-0.5 * x * x));
    }
    return m;
}

double SelectivePulseModel::flip_probability(int n) const {
    const double s = std::sin(0.5 * angles.at(n));
    return s * s;
}

int SelectivePulseModel::last_full_flip() const {
    int n = -1;
    while (n + 1 < dim && flip_probability(n + 1) > 0.99) ++n;
    return n;
}

int SelectivePulseModel::first_no_flip() const {
    for (int n = 0; n < dim; ++n)
        if (flip_probability(n) < 0.01) return n;
    return dim;
}

Mat selective_pulse_operator(const SelectivePulseModel& model) {
    const int d = model.dim;
    Mat u = Mat::Zero(2 * d, 2 * d);
    for (int n = 0; n < d; ++n) {
        const Mat2 r = qubit_rotation(model.angles[n], model.axes[n]).matrix();
        for (int q = 0; q < 2; ++q)
            for (int qp = 0; qp < 2; ++qp) u(q * d + n, qp * d + n) = r(q, qp);
    }
    return u;
}

CavityOperator ideal_cat_operator(IdealOperator variant, cplx alpha, double phi, int dim) {
    const Mat da = displacement(alpha, dim).matrix();
    const Mat I = Mat::Identity(dim, dim);
    const double r = 1.0 / std::sqrt(2.0);
    switch (variant) {
        case IdealOperator::S1:
            return CavityOperator(r * (da - std::exp(cplx(0, phi)) * da.adjoint()));
        case IdealOperator::S1_prime: {
            const Mat rot = rotation_in(dim).matrix();
            return CavityOperator(r * (da - std::exp(cplx(0, phi + 2 * std::norm(alpha))) * da.adjoint()) * rot);
        }
        case IdealOperator::S2:
            return CavityOperator(r * (I - std::exp(cplx(0, phi)) * parity(dim).matrix()) * da);
    }
    throw ValidationError("unknown ideal operator");
}

double ideal_cat_trace(IdealOperator variant, cplx alpha, double phi, const CavityState& initial) {
    const Mat s = ideal_cat_operator(variant, alpha, phi, initial.dim()).matrix();
    return (s * initial.rho() * s.adjoint()).trace().real();
}

CavityState ideal_cat_state(IdealOperator variant, cplx alpha, double phi, const CavityState& initial) {
    return apply(ideal_cat_operator(variant, alpha, phi, initial.dim()), initial);
}

IdealOperator equivalent_operator(Protocol p) {
    return p == Protocol::ECD ? IdealOperator::S1_prime : IdealOperator::S2;
}

Mat free_evolution_operator(double chi_t, int dim) {
    Mat t = Mat::Zero(2 * dim, 2 * dim);
    for (int n = 0; n < dim; ++n) {
        t(n, n) = 1.0;
        t(dim + n, dim + n) = std::exp(cplx(0, chi_t * n));
    }
    return t;
}

namespace {

Mat joint_displacement(cplx beta, int dim) { return joint_operator(qubit_identity(), displacement(beta, dim)); }
Mat joint_qubit(const QubitOperator& q, int dim) {
    return joint_operator(q, CavityOperator(Mat::Identity(dim, dim)));
}

}  // namespace

Mat protocol_unitary(Protocol p, cplx alpha, double phi, const SelectivePulseModel& pulse) {
    const int d = pulse.dim;
    const Mat xs = selective_pulse_operator(pulse);
    const Mat xh = joint_qubit(x_half_pi(phi), d);
    if (p == Protocol::qcMAP) {
        const Mat dp = joint_displacement(alpha, d);
        return dp.adjoint() * xs * dp * free_evolution_operator(kPi, d) * dp * xh;
    }
    const Mat dp = joint_displacement(alpha, d);
    const Mat dz = joint_displacement(-alpha * cplx(1, 1) / 2.0, d);
    const Mat t2 = free_evolution_operator(kPi / 2, d);
    const Mat yp = joint_qubit(y_pi(), d);
    return dp * xs * dp.adjoint() * t2 * dz * yp * dz * t2 * dp * xh;
}

ProtocolReport make_report(const JointState& s) {
    ProtocolReport r;
    const Conditional c = qubit_conditional(s);
    r.p_g = c.p_g;
    r.p_e = c.p_e;
    r.rho_g = c.rho_g;
    r.rho_e = c.rho_e;
    r.s_gg_trace = c.p_g;
    r.off_diag_norm = std::sqrt(2.0) * s.block(0, 1).norm();
    return r;
}

std::pair<JointState, ProtocolReport> run_ideal_protocol(Protocol p, cplx alpha, double phi,
                                                         const CavityState& initial,
                                                         const SelectivePulseModel& pulse) {
    const int d = initial.dim();
    if (pulse.dim != d) throw ValidationError("pulse model dimension differs from state dimension");
    const Mat u = protocol_unitary(p, alpha, phi, pulse);
    const Mat rho0 = product_state(initial, ground_projector()).rho();
    JointState out(d, u * rho0 * u.adjoint());
    ProtocolReport rep = make_report(out);
    if (!rep.rho_g) throw DegenerateBranch("ground branch vanished after the protocol");
    return {std::move(out), std::move(rep)};
}

FockDistributions conditional_fock_distributions(const JointState& s) {
    const int d = s.dim();
    FockDistributions f;
    f.p_g.resize(d);
    f.p_e.resize(d);
    for (int n = 0; n < d; ++n) {
        f.p_g(n) = s.rho()(n, n).real();
        f.p_e(n) = s.rho()(d + n, d + n).real();
    }
    return f;
}

double thermal_tail(double n_th, int n) { return std::pow(n_th / (n_th + 1.0), n + 1); }

}  // namespace hotcat
