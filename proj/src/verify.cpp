#include "vne/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vne/diagnostics.hpp"
#include "vne/entropy.hpp"
#include "vne/errors.hpp"
#include "vne/linalg.hpp"
#include "vne/optimize.hpp"
#include "vne/repr.hpp"

namespace vne {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

Mat random_orthogonal(Eigen::Index d, Rng& rng) {
    Mat s = rng.gaussian_matrix(d, d);
    Mat sym = s + s.transpose();
    return sym_eigh(sym).eigenvectors;
}

}  // namespace

Mat repeated_spectrum_fixture(Eigen::Index half_rows, Eigen::Index half_cols, double scale, Rng& rng) {
    if (half_rows < 1 || half_cols < 1) throw ShapeError("fixture block must be nonempty");
    Mat a = rng.gaussian_matrix(half_rows, half_cols);
    for (Eigen::Index i = 0; i < half_rows; ++i) {
        const double norm = a.row(i).norm();
        if (norm <= 1e-30) throw ZeroRow(i);
        a.row(i) /= norm;
    }
    Mat z = Mat::Zero(2 * half_rows, 2 * half_cols);
    z.topLeftCorner(half_rows, half_cols) = a;
    z.bottomRightCorner(half_rows, half_cols) = a;
    // a right rotation mixes the blocks without touching row norms or the
    // doubled spectrum; the uniform row scale exercises the normalization chain
    return scale * (z * random_orthogonal(2 * half_cols, rng));
}

VerifyOutcome verify_entropy_bounds(int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("need at least one trial");
    Rng rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(32));
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(31));
        Mat h;
        if (t % 10 == 0) {
            // full collapse: a single direction replicated
            const Mat row = rng.gaussian_matrix(1, d);
            h = row.replicate(n, 1);
        } else if (t % 10 == 5) {
            // wildly uneven row scales; the entropy must not notice
            h = rng.gaussian_matrix(n, d);
            for (Eigen::Index i = 0; i < n; ++i)
                h.row(i) *= std::pow(10.0, 6.0 * rng.uniform() - 3.0);
        } else {
            h = rng.gaussian_matrix(n, d);
        }
        const VneValue v = vne_of({h, false});
        const double upper = std::log(static_cast<double>(std::min(n, d)));
        worst = std::max(worst, std::max(-v.entropy, v.entropy - upper));
    }
    VerifyOutcome out;
    out.suite = "entropy-bounds";
    out.trials = trials;
    out.tolerance = 1e-9;
    out.worst_violation = worst;
    out.pass = worst <= out.tolerance;
    out.details = "worst excursion past [0, ln min(n, d)] was " + fmt(worst);
    return out;
}

VerifyOutcome verify_path_equivalence(int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("need at least one trial");
    Rng rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    double worst_eig = 0.0, worst_ent = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(16));
        const Eigen::Index d = n + 1 + static_cast<Eigen::Index>(rng.below(15));
        const RepresentationMatrix z = normalize_rows({rng.gaussian_matrix(n, d), false});
        const Spectrum full = spectrum(z, SpectrumPath::FullEigh);
        const Spectrum gram = spectrum(z, SpectrumPath::Gram);
        const double eig_diff = (full.eigenvalues - gram.eigenvalues).cwiseAbs().maxCoeff();
        const double ent_diff = std::abs(vne(full).entropy - vne(gram).entropy);
        worst_eig = std::max(worst_eig, eig_diff);
        worst_ent = std::max(worst_ent, ent_diff);
        worst = std::max(worst, std::max(ent_diff - 1e-9, eig_diff - 1e-10));
    }
    VerifyOutcome out;
    out.suite = "path-equivalence";
    out.trials = trials;
    out.tolerance = 0.0;
    out.worst_violation = worst;
    out.pass = worst <= out.tolerance;
    out.details = "max eigenvalue gap " + fmt(worst_eig) + ", max entropy gap " + fmt(worst_ent);
    return out;
}

VerifyOutcome verify_gradient(int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("need at least one trial");
    Rng rng(seed);
    constexpr int kChecksPerTrial = 8;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Mat h;
        if (t % 4 == 3) {
            const Eigen::Index a = 2 + static_cast<Eigen::Index>(rng.below(3));
            const Eigen::Index b = 2 + static_cast<Eigen::Index>(rng.below(4));
            h = repeated_spectrum_fixture(a, b, 0.5 + rng.uniform(), rng);
        } else {
            const Eigen::Index n = 4 + static_cast<Eigen::Index>(rng.below(9));
            const Eigen::Index d = 4 + static_cast<Eigen::Index>(rng.below(21));
            h = rng.gaussian_matrix(n, d);
        }
        const auto [value, grad] = vne_gradient({h, false});
        const double grad_scale = grad.cwiseAbs().maxCoeff();
        for (int c = 0; c < kChecksPerTrial; ++c) {
            const Eigen::Index i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(h.rows())));
            const Eigen::Index j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(h.cols())));
            const double step = 1e-5 * std::max(1.0, std::abs(h(i, j)));
            Mat hp = h, hm = h;
            hp(i, j) += step;
            hm(i, j) -= step;
            const double fd = (vne_of({hp, false}).entropy - vne_of({hm, false}).entropy) / (2.0 * step);
            const double denom =
                std::max({std::abs(fd), std::abs(grad(i, j)), 1e-3 * grad_scale, 1e-12});
            worst = std::max(worst, std::abs(fd - grad(i, j)) / denom);
        }
        (void)value;
    }
    VerifyOutcome out;
    out.suite = "gradient";
    out.trials = trials;
    out.tolerance = 1e-5;
    out.worst_violation = worst;
    out.pass = worst <= out.tolerance;
    out.details = "worst relative error against central differences was " + fmt(worst);
    return out;
}

VerifyOutcome verify_rank_bound(int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("need at least one trial");
    Rng rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        double violation;
        if (t % 5 == 4) {
            // flat spectrum: k orthonormal directions, each repeated m times,
            // attains S = ln rank exactly
            const Eigen::Index d = 4 + static_cast<Eigen::Index>(rng.below(12));
            const Eigen::Index k =
                1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(std::min<Eigen::Index>(6, d))));
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(3));
            const Mat u = random_orthogonal(d, rng);
            Mat z(k * m, d);
            for (Eigen::Index r = 0; r < k; ++r)
                for (Eigen::Index rep = 0; rep < m; ++rep) z.row(r * m + rep) = u.col(r).transpose();
            const double gap = rank_bound_gap(spectrum(normalize_rows({z, false})));
            violation = std::abs(gap);  // equality case: the gap must close
        } else {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(24));
            const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(24));
            const double gap = rank_bound_gap(spectrum(normalize_rows({rng.gaussian_matrix(n, d), false})));
            violation = -gap;  // generic case: the gap must stay nonnegative
        }
        worst = std::max(worst, violation);
    }
    VerifyOutcome out;
    out.suite = "rank-bound";
    out.trials = trials;
    out.tolerance = 1e-9;
    out.worst_violation = worst;
    out.pass = worst <= out.tolerance;
    out.details = "ln(rank) - S stayed nonnegative and tight on flat spectra up to " + fmt(worst);
    return out;
}

namespace {

// project onto {symmetric PSD, diagonal = 1/d}: clamp negative eigenvalues,
// then pin the diagonal back (alternating-projection repair)
void repair_covariance(Mat& c, double diag_value) {
    const EigDecomposition e = sym_eigh(c);
    if (e.eigenvalues[c.rows() - 1] < 0.0)
        c = e.eigenvectors * e.eigenvalues.cwiseMax(0.0).asDiagonal() *
            e.eigenvectors.transpose();
    c = 0.5 * (c + c.transpose());
    c.diagonal().setConstant(diag_value);
}

}  // namespace

VerifyOutcome verify_disentanglement(Eigen::Index d, int steps, std::uint64_t seed) {
    if (d < 2) throw ShapeError("need at least two coordinates");
    if (steps < 1) throw Error("need at least one step");
    Rng rng(seed);
    const double inv_d = 1.0 / static_cast<double>(d);
    const double eta = 0.32 * inv_d;
    const double log_d = std::log(static_cast<double>(d));
    constexpr int kTrials = 5;
    double worst = -std::numeric_limits<double>::infinity();
    double band_start = 0.0, band_final = 0.0, band_entropy = 0.0;

    for (int trial = 0; trial < kTrials; ++trial) {
        // covariance with the homogeneous-variance diagonal and free off-diagonals
        Mat c(d, d);
        if (trial == 0) {
            c.setConstant(0.5 * inv_d);  // dense off-diagonal band, strongly entangled
            c.diagonal().setConstant(inv_d);
        } else {
            // half Wishart correlation, half equicorrelation: strictly positive
            // definite with unit diagonal, entangled at every seed
            const Mat w = rng.gaussian_matrix(d, d + 2);
            const Mat s = w * w.transpose();
            const Vec dinv = s.diagonal().cwiseSqrt().cwiseInverse();
            const Mat r = dinv.asDiagonal() * s * dinv.asDiagonal();
            Mat band = Mat::Constant(d, d, 0.5);
            band.diagonal().setOnes();
            c = inv_d * (0.5 * r + 0.5 * band);
        }
        repair_covariance(c, inv_d);

        const double tc_start = gaussian_total_correlation(c);
        double entropy = 0.0;
        for (int s = 0; s < steps; ++s) {
            const EigDecomposition e = sym_eigh(c);
            Vec coef(d);
            for (Eigen::Index k = 0; k < d; ++k)
                coef[k] = -(1.0 + std::log(std::max(e.eigenvalues[k], kEpsGrad)));
            Mat grad = e.eigenvectors * coef.asDiagonal() * e.eigenvectors.transpose();
            grad.diagonal().setZero();  // the diagonal is not a free parameter
            c += eta * grad;
            repair_covariance(c, inv_d);
        }
        {
            const EigDecomposition e = sym_eigh(c);
            entropy = vne(Spectrum{e.eigenvalues.cwiseMax(0.0), SpectrumPath::FullEigh}).entropy;
        }
        const double tc_final = gaussian_total_correlation(c);
        if (trial == 0) {
            band_start = tc_start;
            band_final = tc_final;
            band_entropy = entropy;
        }
        const double violation = std::max({tc_final - 1e-6, std::abs(log_d - entropy) - 1e-6,
                                           0.1 - tc_start, tc_final - tc_start});
        worst = std::max(worst, violation);
    }

    VerifyOutcome out;
    out.suite = "disentanglement";
    out.trials = kTrials;
    out.tolerance = 0.0;
    out.worst_violation = worst;
    out.pass = worst <= out.tolerance;
    out.details = "entangled start: total correlation " + fmt(band_start) + " -> " + fmt(band_final) +
                  ", entropy -> " + fmt(band_entropy) + " (ln d = " + fmt(log_d) + ")";
    return out;
}

VerifyOutcome verify_isotropy_theorem(Eigen::Index n, Eigen::Index d, int steps, std::uint64_t seed) {
    OptimizeConfig cfg;
    cfg.n = n;
    cfg.d = d;
    cfg.mode = OptimizeMode::Maximize;
    cfg.steps = steps;
    cfg.step_size = 0.05;
    cfg.seed = seed;
    cfg.record_every = std::max(1, steps / 10);
    const Trajectory traj = optimize_vne(cfg);

    const RepresentationMatrix& z = traj.final_h;  // already row-normalized
    const double entropy = vne_of(z).entropy;
    const double residual = std::abs(std::log(static_cast<double>(std::min(n, d))) - entropy);
    const IsotropyProfile iso = isotropy_profile(z, 512, 200, seed);
    const double mean = iso.mean();

    VerifyOutcome out;
    out.suite = "isotropy";
    out.trials = 1;
    out.tolerance = 0.0;
    out.worst_violation = std::max(residual - 1e-3, 0.95 - mean);
    out.pass = out.worst_violation <= out.tolerance;
    out.details = "entropy landed within " + fmt(residual) + " of ln min(n, d); partition mean " +
                  fmt(mean) + " against the 0.95 target (finite-width ceiling ~ exp(-1/sqrt(n)) = " +
                  fmt(std::exp(-1.0 / std::sqrt(static_cast<double>(n)))) + ")";
    return out;
}

std::vector<VerifyOutcome> verify_all() {
    std::vector<VerifyOutcome> outcomes;
    outcomes.push_back(verify_entropy_bounds());
    outcomes.push_back(verify_path_equivalence());
    outcomes.push_back(verify_gradient());
    outcomes.push_back(verify_rank_bound());
    outcomes.push_back(verify_disentanglement());
    outcomes.push_back(verify_isotropy_theorem());
    return outcomes;
}

}  // namespace vne
