#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace hotcat {

using cplx = std::complex<double>;

double purity_from_nth(double n_th);

struct CatParams {
    cplx alpha{0.0, 0.0};
    double n_th = 0;
    double phi = 0;
    double purity() const { return purity_from_nth(n_th); }
    double xi_th() const;  // coherence length; +inf at P = 1
    void validate() const;
};

struct TimingErrorParams {
    double tau = 0;     // s
    double chi_qc = 0;  // rad/s
};

enum class CatVariant { ECD, ECD_prime, qcMAP };

double thermal_wigner(cplx beta, double n_th);
double thermal_charfn(cplx beta, double n_th);

// Unnormalized forms: Wigner functions of S rho_T S^dag as the closed
// formulas give them. Dividing by cat_trace_* gives the normalized map.
double cat_wigner_ecd(cplx beta, const CatParams& p);
double cat_wigner_qcmap(cplx beta, const CatParams& p);
// Tr{S rho_T S^dag}
double cat_trace_ecd(const CatParams& p);
double cat_trace_qcmap(const CatParams& p);
double cat_wigner_normalized(cplx beta, const CatParams& p, CatVariant v);

using WignerFn = std::function<double(cplx)>;
using CharFn = std::function<cplx(cplx)>;

double cat_wigner_general(cplx beta, cplx alpha, double phi, const WignerFn& w0, const CharFn& chi0,
                          CatVariant variant);

double coherence_thermal(double x1, double x2, double n_th);
double coherence_ecd(double x1, double x2, const CatParams& p);
double coherence_qcmap(double x1, double x2, const CatParams& p);

enum class ApproxForm { Smooth, Indicator };
// variant ECD or qcMAP. alpha is taken as real (|alpha|).
double coherence_approx(double x1, double x2, const CatParams& p, CatVariant variant,
                        ApproxForm form = ApproxForm::Smooth);

// qcMAP with the free evolution lengthened by tau
double timing_error_wigner(cplx beta, const CatParams& p, const TimingErrorParams& te);
double timing_error_wigner_linearized(cplx beta, const CatParams& p, const TimingErrorParams& te);
// coefficient of |beta|^2 inside the linearized fringe cosine
double timing_error_bending_coefficient(const CatParams& p, const TimingErrorParams& te);

struct MarginalOptions {
    double re_half_width = 0;  // integration box over Re beta
    double im_half_width = 0;  // sampled range of Im beta
    int n_samples = 0;         // Im beta samples
    double re_step = 0;        // trapezoid step over Re beta
};

// Box of +-(|alpha| + 6/sqrt(2P)) with a step resolving the fringe period 16x.
MarginalOptions default_marginal_options(double alpha_abs, double n_th, int n_samples);

struct Marginal {
    std::vector<double> im_beta;
    std::vector<double> density;  // sum(density) * d(im_beta) = 1
    double spacing = 0;
};

Marginal marginal_im(const WignerFn& w, const MarginalOptions& opt);

// Period of the largest local maximum of |DFT| above the zero bin, along with
// the bin index and the width of one bin expressed as a period change.
struct FringePeak {
    int bin = 0;
    double frequency = 0;  // rad per unit Im beta
    double period = 0;
};
FringePeak dominant_fringe(const Marginal& m);

}  // namespace hotcat
