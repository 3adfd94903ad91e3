#pragma once

#include <utility>

#include <Eigen/Dense>

#include "vne/repr.hpp"

namespace vne {

// Value side drops tiny eigenvalues (a term with lambda <= kEpsDrop contributes
// exactly 0, the 0*log(0)=0 convention); the gradient side clamps them up to
// kEpsGrad instead, so collapsed directions keep a finite reviving pull.
inline constexpr double kEpsDrop = 1e-12;
inline constexpr double kEpsGrad = 1e-12;

struct VneValue {
    double entropy = 0.0;            // natural-log units
    Eigen::Index effective_terms = 0;  // eigenvalues above kEpsDrop
};

struct RegularizerConfig {
    double alpha = 0.0;        // sign picks the regime in L_task - alpha * S
    double frobenius_c = 1.0;  // target constant for the Frobenius baseline
    double alpha1 = 0.0;       // invariance weight (cosine term)
    double alpha2 = 0.0;       // entropy weight
};

struct IvneResult {
    double loss = 0.0;
    double mean_cosine = 0.0;  // alignment of the positive pairs
    Mat grad1;
    Mat grad2;
};

// -sum_j lambda_j ln lambda_j over the spectrum (drop semantics)
VneValue vne(const Spectrum& spec);

// normalize -> autocorrelation -> eigenvalues -> entropy, path picked by shape
VneValue vne_of(const RepresentationMatrix& h);

// Analytic d(entropy)/dH for raw H, chained through row normalization and the
// eigendecomposition:
//   Z = normalize(H); C = Z^T Z / n = U diag(lambda) U^T
//   dS/dC = -U diag(1 + ln max(lambda, eps)) U^T
//   dS/dZ = (2/n) Z dS/dC
//   dS/dh_i = (I - z_i z_i^T) (dS/dz_i) / ||h_i||
// The n < d case runs on the n x n Gram matrix instead; both paths agree.
std::pair<VneValue, Mat> vne_gradient(const RepresentationMatrix& h);

// ||Z^T Z / n - c I||_F^2 with gradient taken w.r.t. Z itself
std::pair<double, Mat> frobenius_loss(const RepresentationMatrix& z, double c);

// loss = -alpha1 * mean_i cos(h1_i, h2_i) - alpha2 * S(C_auto of normalized H1).
// The entropy term differentiates only through H1; the cosine term through both.
IvneResult ivne_loss(const RepresentationMatrix& h1, const RepresentationMatrix& h2,
                     const RegularizerConfig& cfg);

// Shared normalization-Jacobian chain: given dL/dZ for Z = normalize(H),
// returns dL/dH (per row: project out the radial part, divide by the raw norm).
Mat chain_grad_through_row_normalization(const Mat& raw, const Mat& z, const Mat& dz);

}  // namespace vne
