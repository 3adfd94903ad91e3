#include <cmath>

#include <doctest.h>

#include "vne/entropy.hpp"
#include "vne/errors.hpp"
#include "vne/repr.hpp"
#include "vne/rng.hpp"
#include "vne/verify.hpp"

using namespace vne;

namespace {

// worst relative error of the analytic gradient against central differences,
// denominator floored so near-zero entries cannot manufacture blow-ups
double gradient_fd_worst(const Mat& h) {
    const auto [value, grad] = vne_gradient({h, false});
    (void)value;
    const double grad_scale = grad.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            const double step = 1e-5 * std::max(1.0, std::abs(h(i, j)));
            Mat hp = h, hm = h;
            hp(i, j) += step;
            hm(i, j) -= step;
            const double fd = (vne_of({hp, false}).entropy - vne_of({hm, false}).entropy) / (2 * step);
            const double denom =
                std::max({std::abs(fd), std::abs(grad(i, j)), 1e-3 * grad_scale, 1e-12});
            worst = std::max(worst, std::abs(fd - grad(i, j)) / denom);
        }
    }
    return worst;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("orthonormal rows hit ln n") {
    const VneValue v = vne_of({Mat::Identity(4, 4), true});
    CHECK(v.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    CHECK(v.effective_terms == 4);
}

TEST_CASE("full collapse scores zero with one effective term") {
    Rng rng(2);
    const Mat h = rng.gaussian_matrix(1, 8).replicate(6, 1);
    const VneValue v = vne_of({h, false});
    CHECK(std::abs(v.entropy) < 1e-12);
    CHECK(v.effective_terms == 1);
}

TEST_CASE("drop semantics: tiny eigenvalues contribute nothing") {
    Vec lam(3);
    lam << 1.0 - 1e-13, 1e-13, 0.0;
    const VneValue v = vne::vne(Spectrum{lam, SpectrumPath::FullEigh});
    CHECK(v.effective_terms == 1);
    CHECK(std::abs(v.entropy) < 1e-11);

    Vec half(2);
    half << 0.5, 0.5;
    CHECK(vne::vne(Spectrum{half, SpectrumPath::FullEigh}).entropy ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("scale invariance") {
    Rng rng(4);
    const Mat h = rng.gaussian_matrix(7, 11);
    const double s = vne_of({h, false}).entropy;
    for (double k : {1e-3, 1e3}) {
        CHECK(std::abs(vne_of({Mat(k * h), false}).entropy - s) < 1e-12);
    }
}

TEST_CASE("bounds hold on random draws") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(20));
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(20));
        const double s = vne_of({rng.gaussian_matrix(n, d), false}).entropy;
        CHECK(s >= -1e-12);
        CHECK(s <= std::log(static_cast<double>(std::min(n, d))) + 1e-12);
    }
}

TEST_CASE("value and gradient paths agree bit-for-bit on the entropy") {
    Rng rng(8);
    for (Eigen::Index n : {4, 9}) {
        const Mat h = rng.gaussian_matrix(n, 6);
        CHECK(vne_of({h, false}).entropy == vne_gradient({h, false}).first.entropy);
    }
}

TEST_CASE("gradient matches finite differences, generic shapes") {
    Rng rng(10);
    CHECK(gradient_fd_worst(rng.gaussian_matrix(6, 10)) < 1e-5);  // Gram side
    CHECK(gradient_fd_worst(rng.gaussian_matrix(9, 5)) < 1e-5);   // full side
}

TEST_CASE("gradient matches finite differences on a fully repeated spectrum") {
    Rng rng(12);
    const Mat h = repeated_spectrum_fixture(3, 4, 0.7, rng);
    CHECK(gradient_fd_worst(h) < 1e-5);
}

TEST_CASE("maximum-entropy point is stationary") {
    // scaled orthonormal rows: S = ln n is the peak, so the projected gradient vanishes
    Mat h = Mat::Zero(4, 8);
    for (int i = 0; i < 4; ++i) h(i, i) = 3.0;
    const auto [value, grad] = vne_gradient({h, false});
    CHECK(value.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-13));
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("exact collapse has zero projected gradient, perturbation escapes") {
    // all rows identical: the reviving pull is purely radial and the row
    // normalization removes it, so the gradient is exactly trapped...
    Mat h = Mat::Ones(4, 6);
    const auto [value, grad] = vne_gradient({h, false});
    CHECK(value.entropy < 1e-10);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-10);

    // ...while any off-ray perturbation restores a usable escape direction
    Mat p = h;
    p(0, 1) += 1e-8;
    const auto [pv, pgrad] = vne_gradient({p, false});
    (void)pv;
    CHECK(pgrad.cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("frobenius loss: closed form on a collapsed matrix") {
    // C = e1 e1^T, c = 1/4: (1 - 1/4)^2 + 3 * (1/4)^2 = 0.75
    Mat h = Mat::Zero(5, 4);
    h.col(0).setOnes();
    const RepresentationMatrix z = normalize_rows({h, false});
    const auto [loss, grad] = frobenius_loss(z, 0.25);
    (void)grad;
    CHECK(loss == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("frobenius loss: zero at the whitened point") {
    const RepresentationMatrix z{Mat::Identity(4, 4), true};
    const auto [loss, grad] = frobenius_loss(z, 0.25);
    CHECK(loss < 1e-28);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("frobenius loss demands normalized input and matches finite differences") {
    Rng rng(14);
    CHECK_THROWS_AS(frobenius_loss({rng.gaussian_matrix(3, 3), false}, 0.5), Error);

    const Mat h = rng.gaussian_matrix(5, 4);
    const RepresentationMatrix z = normalize_rows({h, false});
    const auto [loss0, gz] = frobenius_loss(z, 0.25);
    (void)loss0;
    // chain the gradient back to the raw rows and difference the composite map
    const Mat gh = chain_grad_through_row_normalization(h, z.m, gz);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            const double step = 1e-6 * std::max(1.0, std::abs(h(i, j)));
            Mat hp = h, hm = h;
            hp(i, j) += step;
            hm(i, j) -= step;
            const double fp = frobenius_loss(normalize_rows({hp, false}), 0.25).first;
            const double fm = frobenius_loss(normalize_rows({hm, false}), 0.25).first;
            const double fd = (fp - fm) / (2 * step);
            const double denom = std::max({std::abs(fd), std::abs(gh(i, j)), 1e-12});
            worst = std::max(worst, std::abs(fd - gh(i, j)) / denom);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("ivne loss: identical views align perfectly") {
    Rng rng(16);
    const Mat h = rng.gaussian_matrix(6, 5);
    RegularizerConfig rc;
    rc.alpha1 = 2.0;
    rc.alpha2 = 0.5;
    const IvneResult r = ivne_loss({h, false}, {h, false}, rc);
    CHECK(r.mean_cosine == doctest::Approx(1.0).epsilon(1e-14));
    const double entropy = vne_of({h, false}).entropy;
    CHECK(r.loss == doctest::Approx(-2.0 * 1.0 - 0.5 * entropy).epsilon(1e-12));
}

TEST_CASE("ivne loss: mismatched shapes throw") {
    Rng rng(18);
    RegularizerConfig rc;
    rc.alpha1 = 1.0;
    CHECK_THROWS_AS(
        ivne_loss({rng.gaussian_matrix(3, 4), false}, {rng.gaussian_matrix(4, 4), false}, rc),
        ShapeMismatch);
}

TEST_CASE("ivne gradients match finite differences") {
    Rng rng(20);
    const Mat h1 = rng.gaussian_matrix(4, 5);
    const Mat h2 = rng.gaussian_matrix(4, 5);
    for (double a2 : {0.7, 0.0}) {
        RegularizerConfig rc;
        rc.alpha1 = 1.5;
        rc.alpha2 = a2;
        const IvneResult r = ivne_loss({h1, false}, {h2, false}, rc);
        double worst = 0.0;
        for (int side = 0; side < 2; ++side) {
            const Mat& base = side == 0 ? h1 : h2;
            const Mat& grad = side == 0 ? r.grad1 : r.grad2;
            for (Eigen::Index i = 0; i < base.rows(); ++i) {
                for (Eigen::Index j = 0; j < base.cols(); ++j) {
                    const double step = 1e-6 * std::max(1.0, std::abs(base(i, j)));
                    Mat p = base, m = base;
                    p(i, j) += step;
                    m(i, j) -= step;
                    const double lp = side == 0 ? ivne_loss({p, false}, {h2, false}, rc).loss
                                                : ivne_loss({h1, false}, {p, false}, rc).loss;
                    const double lm = side == 0 ? ivne_loss({m, false}, {h2, false}, rc).loss
                                                : ivne_loss({h1, false}, {m, false}, rc).loss;
                    const double fd = (lp - lm) / (2 * step);
                    const double denom = std::max({std::abs(fd), std::abs(grad(i, j)), 1e-10});
                    worst = std::max(worst, std::abs(fd - grad(i, j)) / denom);
                }
            }
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("ivne ablation skips the entropy term entirely") {
    Rng rng(22);
    const Mat h1 = rng.gaussian_matrix(5, 6);
    const Mat h2 = rng.gaussian_matrix(5, 6);
    RegularizerConfig rc;
    rc.alpha1 = 3.0;
    rc.alpha2 = 0.0;
    const IvneResult r = ivne_loss({h1, false}, {h2, false}, rc);
    CHECK(r.loss == -3.0 * r.mean_cosine);
}

}  // TEST_SUITE
