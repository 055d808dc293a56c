#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>

#include "hotcat/errors.hpp"

namespace hotcat {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
constexpr cplx kI{0.0, 1.0};

// Joint (cavity x qubit) matrices are qubit-major: index = q*dim + n with
// q = 0 for |g> and q = 1 for |e>. So the joint operator Q (x) C is
// kron(Q, C) and each 2x2 block of rho is a dim x dim cavity matrix.

class CavityOperator {
public:
    explicit CavityOperator(Mat m);
    int dim() const { return static_cast<int>(m_.rows()); }
    const Mat& matrix() const { return m_; }
    CavityOperator adjoint() const { return CavityOperator(m_.adjoint()); }
    friend CavityOperator operator*(const CavityOperator& a, const CavityOperator& b);

private:
    Mat m_;
};

class QubitOperator {
public:
    QubitOperator() : m_(Mat2::Identity()) {}
    explicit QubitOperator(const Mat2& m) : m_(m) {}
    const Mat2& matrix() const { return m_; }
    QubitOperator adjoint() const { return QubitOperator(m_.adjoint()); }
    friend QubitOperator operator*(const QubitOperator& a, const QubitOperator& b) {
        return QubitOperator(a.m_ * b.m_);
    }

private:
    Mat2 m_;
};

struct StateDiagnostics {
    double trace_error = 0;        // |Tr rho - 1|
    double hermiticity_error = 0;  // max |rho - rho^dag|
    double min_eigenvalue = 0;     // of the Hermitian part
};

StateDiagnostics diagnose(const Mat& rho);

// Throws InvalidState when a diagnostic is out of tolerance. The eigenvalue
// check costs a full decomposition, so constructors only run the cheap ones.
void validate_density_matrix(const Mat& rho, double trace_tol = 1e-9, double herm_tol = 1e-12,
                             double eig_tol = -1e-9);

class CavityState {
public:
    explicit CavityState(Mat rho);
    int dim() const { return static_cast<int>(rho_.rows()); }
    const Mat& rho() const { return rho_; }

private:
    Mat rho_;
};

class JointState {
public:
    JointState(int dim, Mat rho, double time = 0.0);
    int dim() const { return dim_; }
    const Mat& rho() const { return rho_; }
    double time() const { return time_; }
    // cavity block <q|rho|q'>
    Mat block(int q, int qp) const { return rho_.block(q * dim_, qp * dim_, dim_, dim_); }

private:
    int dim_;
    Mat rho_;
    double time_;
};

// matrix exponential (Pade scaling and squaring)
Mat expm(const Mat& a);

int default_dim(double alpha_abs, double n_th);

CavityOperator annihilation(int dim);
CavityOperator creation(int dim);
CavityOperator number_operator(int dim);
CavityOperator displacement(cplx beta, int dim);
CavityOperator parity(int dim);
CavityOperator rotation_in(int dim);

CavityState thermal_state(double n_th, int dim);
CavityState fock_state(int n, int dim);
CavityState coherent_state(cplx beta, int dim);
CavityState apply(const CavityOperator& u, const CavityState& s);

double purity(const CavityState& s);
double mean_photon_number(const CavityState& s);

// Laguerre series summed along the diagonals of rho, O(dim^2) per point.
double wigner_numeric(const CavityState& s, cplx beta);
// Same quantity evaluated as a matrix element of D Pi D^dag, O(dim^3).
double wigner_displaced_parity(const CavityState& s, cplx beta);
// Wigner function of an arbitrary (possibly unnormalized, non-Hermitian)
// cavity matrix: (2/pi) Tr[D Pi D^dag m] taking the real part.
double wigner_of_matrix(const Mat& m, cplx beta);

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2
double fidelity(const CavityState& a, const CavityState& b);
double fidelity(const Mat& a, const Mat& b);

QubitOperator qubit_identity();
QubitOperator sigma_x();
QubitOperator sigma_y();
QubitOperator sigma_z();
// R(a,u) = cos(a/2) 1 + i (u.sigma) sin(a/2)
QubitOperator qubit_rotation(double a, const std::array<double, 3>& u);
QubitOperator x_half_pi(double phi);
QubitOperator x_pi();
QubitOperator y_pi();

Mat joint_operator(const QubitOperator& q, const CavityOperator& c);
JointState product_state(const CavityState& c, const Mat2& qubit_rho, double time = 0.0);
Mat2 ground_projector();
Mat2 excited_projector();

struct Conditional {
    double p_g = 0;
    double p_e = 0;
    std::optional<CavityState> rho_g;  // empty when p_g < 1e-12
    std::optional<CavityState> rho_e;
    const CavityState& g() const;  // DegenerateBranch when empty
    const CavityState& e() const;
};

Conditional qubit_conditional(const JointState& s);

}  // namespace hotcat
