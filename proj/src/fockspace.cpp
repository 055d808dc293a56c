#include "hotcat/fockspace.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace hotcat {

namespace {

void require_dim(int dim) {
    if (dim < 2) throw InvalidState("dimension must be >= 2");
}

void check_beta(cplx beta, int dim) {
    if (std::norm(beta) > dim / 4.0) {
        std::ostringstream os;
        os << "|beta|^2 = " << std::norm(beta) << " exceeds dim/4 = " << dim / 4.0;
        throw TruncationError(os.str());
    }
}

Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// cheap checks shared by the state constructors
void check_cheap(const Mat& rho, const char* what) {
    if (rho.rows() != rho.cols()) throw InvalidState(std::string(what) + ": matrix not square");
    const double tr_err = std::abs(rho.trace() - cplx(1.0));
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (!(tr_err <= 1e-9)) {
        std::ostringstream os;
        os << what << ": trace off by " << tr_err;
        throw InvalidState(os.str());
    }
    if (!(herm <= 1e-9)) {
        std::ostringstream os;
        os << what << ": not Hermitian (" << herm << ")";
        throw InvalidState(os.str());
    }
}

}  // namespace

CavityOperator::CavityOperator(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidState("operator not square");
    require_dim(static_cast<int>(m_.rows()));
}

CavityOperator operator*(const CavityOperator& a, const CavityOperator& b) {
    return CavityOperator(a.m_ * b.m_);
}

StateDiagnostics diagnose(const Mat& rho) {
    StateDiagnostics d;
    d.trace_error = std::abs(rho.trace() - cplx(1.0));
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho), Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

void validate_density_matrix(const Mat& rho, double trace_tol, double herm_tol, double eig_tol) {
    const auto d = diagnose(rho);
    std::ostringstream os;
    if (!(d.trace_error <= trace_tol)) os << "trace error " << d.trace_error << "; ";
    if (!(d.hermiticity_error <= herm_tol)) os << "hermiticity error " << d.hermiticity_error << "; ";
    if (!(d.min_eigenvalue >= eig_tol)) os << "min eigenvalue " << d.min_eigenvalue << "; ";
    if (!os.str().empty()) throw InvalidState("invalid density matrix: " + os.str());
}

CavityState::CavityState(Mat rho) {
    check_cheap(rho, "cavity state");
    require_dim(static_cast<int>(rho.rows()));
    rho_ = hermitize(rho);
}

JointState::JointState(int dim, Mat rho, double time) : dim_(dim), time_(time) {
    require_dim(dim);
    if (rho.rows() != 2 * dim) throw InvalidState("joint state: size is not 2*dim");
    check_cheap(rho, "joint state");
    rho_ = hermitize(rho);
}

Mat expm(const Mat& a) { return a.exp(); }

int default_dim(double alpha_abs, double n_th) {
    const double s = 2.0 * alpha_abs + 6.0 * std::sqrt(n_th + 1.0);
    return std::clamp(static_cast<int>(std::ceil(s * s)), 2, 1024);
}

CavityOperator annihilation(int dim) {
    require_dim(dim);
    Mat c = Mat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) c(n - 1, n) = std::sqrt(static_cast<double>(n));
    return CavityOperator(c);
}

CavityOperator creation(int dim) { return annihilation(dim).adjoint(); }

CavityOperator number_operator(int dim) {
    require_dim(dim);
    Mat n = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = k;
    return CavityOperator(n);
}

CavityOperator displacement(cplx beta, int dim) {
    require_dim(dim);
    check_beta(beta, dim);
    if (beta == cplx(0.0)) return CavityOperator(Mat::Identity(dim, dim));
    const Mat c = annihilation(dim).matrix();
    const Mat gen = beta * c.adjoint() - std::conj(beta) * c;
    return CavityOperator(expm(gen));
}

CavityOperator parity(int dim) {
    require_dim(dim);
    Mat p = Mat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return CavityOperator(p);
}

CavityOperator rotation_in(int dim) {
    require_dim(dim);
    static const cplx pow_i[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Mat r = Mat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) r(n, n) = pow_i[n % 4];
    return CavityOperator(r);
}

CavityState thermal_state(double n_th, int dim) {
    require_dim(dim);
    if (!(n_th >= 0)) throw InvalidState("n_th must be >= 0");
    Mat rho = Mat::Zero(dim, dim);
    if (n_th == 0) {
        rho(0, 0) = 1.0;
        return CavityState(rho);
    }
    const double r = n_th / (n_th + 1.0);
    const double tail = std::pow(r, dim);
    if (tail >= 1e-8) {
        std::ostringstream os;
        os << "thermal tail " << tail << " beyond dim " << dim << " (n_th=" << n_th << ")";
        throw TruncationError(os.str());
    }
    double sum = 0, p = 1.0 - r;
    std::vector<double> w(dim);
    for (int n = 0; n < dim; ++n, p *= r) {
        w[n] = p;
        sum += p;
    }
    for (int n = 0; n < dim; ++n) rho(n, n) = w[n] / sum;
    return CavityState(rho);
}

CavityState fock_state(int n, int dim) {
    require_dim(dim);
    if (n < 0 || n >= dim) throw TruncationError("Fock index outside truncation");
    Mat rho = Mat::Zero(dim, dim);
    rho(n, n) = 1.0;
    return CavityState(rho);
}

CavityState coherent_state(cplx beta, int dim) {
    require_dim(dim);
    check_beta(beta, dim);
    // amplitudes by recurrence; renormalized over the truncation
    Eigen::VectorXcd v(dim);
    v(0) = std::exp(-0.5 * std::norm(beta));
    for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
    v /= v.norm();
    return CavityState(v * v.adjoint());
}

CavityState apply(const CavityOperator& u, const CavityState& s) {
    Mat r = u.matrix() * s.rho() * u.matrix().adjoint();
    const cplx tr = r.trace();
    if (std::abs(tr) < 1e-300) throw DegenerateBranch("operator annihilates the state");
    return CavityState(r / tr.real());
}

double purity(const CavityState& s) {
    // Tr rho^2 = sum |rho_ij|^2 for Hermitian rho
    return s.rho().squaredNorm();
}

double mean_photon_number(const CavityState& s) {
    double n = 0;
    for (int k = 0; k < s.dim(); ++k) n += k * s.rho()(k, k).real();
    return n;
}

double wigner_of_matrix(const Mat& rho, cplx beta) {
    const int dim = static_cast<int>(rho.rows());
    check_beta(beta, dim);
    // W = (2/pi) e^{-x/2} Re sum_k A^k/sqrt(k!) S_k with A = 2 beta, x = |A|^2 and
    // S_k = sum_m eps_k rho(m, m+k) phi_m^k(x), phi normalized Laguerre functions.
    // Clenshaw along each diagonal, Horner over k. The plain row recurrence
    // blows up for large |beta| once the tail of rho is nonzero.
    const cplx A = 2.0 * beta;
    const double x = std::norm(A);
    cplx w = 0;
    for (int k = dim - 1; k >= 0; --k) {
        const double eps = k == 0 ? 1.0 : 2.0;
        const int len = dim - k;
        cplx b1 = 0, b2 = 0;
        for (int m = len - 1; m >= 0; --m) {
            const double am = -(2.0 * m + k + 1 - x) / std::sqrt((m + 1.0) * (m + k + 1.0));
            const double bm1 = -std::sqrt((m + 1.0) * (m + k + 1.0) / ((m + 2.0) * (m + k + 2.0)));
            const cplx b0 = eps * rho(m, m + k) + am * b1 + bm1 * b2;
            b2 = b1;
            b1 = b0;
        }
        w = b1 + (k + 1 < dim ? w * A / std::sqrt(k + 1.0) : cplx(0));
    }
    return 2.0 / kPi * std::exp(-x / 2) * w.real();
}

double wigner_numeric(const CavityState& s, cplx beta) { return wigner_of_matrix(s.rho(), beta); }

double wigner_displaced_parity(const CavityState& s, cplx beta) {
    const int dim = s.dim();
    const Mat d = displacement(beta, dim).matrix();
    const Mat p = parity(dim).matrix();
    return 2.0 / kPi * (d * p * d.adjoint() * s.rho()).trace().real();
}

namespace {

Mat psd_sqrt(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
    RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) throw InvalidState("fidelity: dimension mismatch");
    const Mat sa = psd_sqrt(a);
    const Mat m = hermitize(sa * b * sa);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    double t = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) t += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    return t * t;
}

double fidelity(const CavityState& a, const CavityState& b) { return fidelity(a.rho(), b.rho()); }

QubitOperator qubit_identity() { return QubitOperator(Mat2::Identity()); }

QubitOperator sigma_x() {
    Mat2 m;
    m << 0, 1, 1, 0;
    return QubitOperator(m);
}

QubitOperator sigma_y() {
    // i(-|g><e| + |e><g|)
    Mat2 m;
    m << 0, -kI, kI, 0;
    return QubitOperator(m);
}

QubitOperator sigma_z() {
    Mat2 m;
    m << 1, 0, 0, -1;
    return QubitOperator(m);
}

QubitOperator qubit_rotation(double a, const std::array<double, 3>& u) {
    const double nrm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (!(nrm > 0)) throw InvalidState("rotation axis must be nonzero");
    const Mat2 us = (u[0] * sigma_x().matrix() + u[1] * sigma_y().matrix() + u[2] * sigma_z().matrix()) / nrm;
    return QubitOperator(std::cos(a / 2) * Mat2::Identity() + kI * std::sin(a / 2) * us);
}

QubitOperator x_half_pi(double phi) { return qubit_rotation(kPi / 2, {std::cos(phi), std::sin(phi), 0.0}); }
QubitOperator x_pi() { return qubit_rotation(kPi, {1.0, 0.0, 0.0}); }
QubitOperator y_pi() { return qubit_rotation(kPi, {0.0, 1.0, 0.0}); }

Mat joint_operator(const QubitOperator& q, const CavityOperator& c) {
    return Eigen::kroneckerProduct(q.matrix(), c.matrix()).eval();
}

Mat2 ground_projector() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 1;
    return m;
}

Mat2 excited_projector() {
    Mat2 m = Mat2::Zero();
    m(1, 1) = 1;
    return m;
}

JointState product_state(const CavityState& c, const Mat2& qubit_rho, double time) {
    return JointState(c.dim(), Eigen::kroneckerProduct(qubit_rho, c.rho()).eval(), time);
}

const CavityState& Conditional::g() const {
    if (!rho_g) throw DegenerateBranch("ground branch probability below 1e-12");
    return *rho_g;
}

const CavityState& Conditional::e() const {
    if (!rho_e) throw DegenerateBranch("excited branch probability below 1e-12");
    return *rho_e;
}

Conditional qubit_conditional(const JointState& s) {
    Conditional c;
    const Mat gg = s.block(0, 0), ee = s.block(1, 1);
    c.p_g = gg.trace().real();
    c.p_e = ee.trace().real();
    if (c.p_g >= 1e-12) c.rho_g.emplace(gg / c.p_g);
    if (c.p_e >= 1e-12) c.rho_e.emplace(ee / c.p_e);
    return c;
}

}  // namespace hotcat
