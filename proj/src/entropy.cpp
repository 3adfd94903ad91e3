#include "vne/entropy.hpp"

#include <cmath>

namespace vne {

namespace {

VneValue entropy_of_eigenvalues(const Vec& lam) {
    VneValue v;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        if (lam[k] > kEpsDrop) {
            v.entropy -= lam[k] * std::log(lam[k]);
            ++v.effective_terms;
        }
    }
    if (v.entropy < 0.0 && v.entropy > -1e-15) v.entropy = 0.0;  // -0.0 guard
    return v;
}

}  // namespace

VneValue vne(const Spectrum& spec) { return entropy_of_eigenvalues(spec.eigenvalues); }

VneValue vne_of(const RepresentationMatrix& h) {
    const RepresentationMatrix z = h.normalized ? h : normalize_rows(h);
    return vne(spectrum(z, SpectrumPath::Auto));
}

Mat chain_grad_through_row_normalization(const Mat& raw, const Mat& z, const Mat& dz) {
    Mat dh(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const double radial = dz.row(i).dot(z.row(i));
        dh.row(i) = (dz.row(i) - radial * z.row(i)) / raw.row(i).norm();
    }
    return dh;
}

std::pair<VneValue, Mat> vne_gradient(const RepresentationMatrix& h) {
    const RepresentationMatrix z = h.normalized ? h : normalize_rows(h);
    const Eigen::Index n = z.n(), d = z.d();
    const double inv_n = 1.0 / static_cast<double>(n);

    Vec lam;       // descending, clamped at 0, padded to d (to mirror spectrum())
    Mat dz;        // dS/dZ
    if (n < d) {
        // assembled exactly as in the spectrum helper so both report the same bits
        const Mat gram = z.m * z.m.transpose() / static_cast<double>(n);
        EigDecomposition eig = sym_eigh(gram);
        lam = Vec::Zero(d);
        Vec coef(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            lam[k] = std::max(eig.eigenvalues[k], 0.0);
            coef[k] = 1.0 + std::log(std::max(lam[k], kEpsGrad));
        }
        // dS/dZ = -(2/n) W diag(coef) W^T Z ; zero-eigenvalue terms die against Z
        dz = -(2.0 * inv_n) *
             (eig.eigenvectors * coef.asDiagonal() * eig.eigenvectors.transpose() * z.m);
    } else {
        EigDecomposition eig = sym_eigh(autocorrelation(z));
        lam = Vec::Zero(d);
        Vec coef(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            lam[k] = std::max(eig.eigenvalues[k], 0.0);
            coef[k] = 1.0 + std::log(std::max(lam[k], kEpsGrad));
        }
        dz = -(2.0 * inv_n) *
             (z.m * eig.eigenvectors * coef.asDiagonal() * eig.eigenvectors.transpose());
    }

    return {entropy_of_eigenvalues(lam), chain_grad_through_row_normalization(h.m, z.m, dz)};
}

std::pair<double, Mat> frobenius_loss(const RepresentationMatrix& z, double c) {
    if (!z.normalized) throw ShapeError("frobenius_loss expects row-normalized input");
    const double inv_n = 1.0 / static_cast<double>(z.n());
    Mat diff = z.m.transpose() * z.m * inv_n;
    diff.diagonal().array() -= c;
    const double loss = diff.squaredNorm();
    Mat grad = (4.0 * inv_n) * (z.m * diff);
    return {loss, std::move(grad)};
}

IvneResult ivne_loss(const RepresentationMatrix& h1, const RepresentationMatrix& h2,
                     const RegularizerConfig& cfg) {
    if (h1.n() != h2.n() || h1.d() != h2.d())
        throw ShapeMismatch("view matrices differ in shape");
    const Eigen::Index n = h1.n();
    const double inv_n = 1.0 / static_cast<double>(n);

    IvneResult out;
    out.grad1 = Mat::Zero(h1.n(), h1.d());
    out.grad2 = Mat::Zero(h1.n(), h1.d());

    double mean_cos = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double na = h1.m.row(i).norm(), nb = h2.m.row(i).norm();
        if (na <= 1e-30) throw ZeroRow(static_cast<std::size_t>(i));
        if (nb <= 1e-30) throw ZeroRow(static_cast<std::size_t>(i));
        const Vec a_hat = h1.m.row(i).transpose() / na;
        const Vec b_hat = h2.m.row(i).transpose() / nb;
        const double cs = a_hat.dot(b_hat);
        mean_cos += cs;
        // d cos / d a = (b_hat - cos * a_hat) / ||a||, symmetric for b
        out.grad1.row(i) = -cfg.alpha1 * inv_n * (b_hat - cs * a_hat).transpose() / na;
        out.grad2.row(i) = -cfg.alpha1 * inv_n * (a_hat - cs * b_hat).transpose() / nb;
    }
    mean_cos *= inv_n;
    out.mean_cosine = mean_cos;

    double entropy = 0.0;
    if (cfg.alpha2 != 0.0) {  // the entropy term (and its eigh) only exists when weighted
        auto [val, grad] = vne_gradient(h1);
        entropy = val.entropy;
        out.grad1 -= cfg.alpha2 * grad;
    }
    out.loss = -cfg.alpha1 * mean_cos - cfg.alpha2 * entropy;
    return out;
}

}  // namespace vne
