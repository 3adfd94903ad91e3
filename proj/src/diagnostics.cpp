#include "vne/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vne/rng.hpp"

namespace vne {

double IsotropyProfile::mean() const {
    double s = 0.0;
    for (double v : normalized_values) s += v;
    return normalized_values.empty() ? 0.0 : s / static_cast<double>(normalized_values.size());
}

double IsotropyProfile::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : normalized_values) m = std::min(m, v);
    return normalized_values.empty() ? 0.0 : m;
}

double SimilarityProfile::mean_abs() const {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double SimilarityProfile::p95_abs() const {
    if (values.empty()) return 0.0;
    std::vector<double> a(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) a[i] = std::abs(values[i]);
    std::sort(a.begin(), a.end());
    // nearest-rank percentile: ceil(0.95 m)-th smallest
    std::size_t r = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(a.size())));
    return a[std::max<std::size_t>(r, 1) - 1];
}

Eigen::Index rank_surrogate(const Spectrum& spec, double energy) {
    if (energy <= 0.0 || energy > 1.0) throw Error("energy must be in (0, 1]");
    const Vec& lam = spec.eigenvalues;
    double total = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) total += lam[k];
    // inclusive threshold; the slack keeps "cumulative hits the target exactly"
    // true when the running sum wobbles in the last ulps
    const double target = energy * total - 1e-12 * total;
    double cum = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        cum += lam[k];
        if (cum >= target) return k + 1;
    }
    return lam.size();  // fp shortfall: everything was needed
}

double rank_bound_gap(const Spectrum& spec, double eps_rank) {
    Eigen::Index live = 0;
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
        if (spec.eigenvalues[k] > eps_rank) ++live;
    if (live == 0) throw DegenerateSpectrum("no eigenvalue above eps_rank");
    return std::log(static_cast<double>(live)) - vne(spec).entropy;
}

namespace {

double partition_value(const Mat& z, const Vec& c) {
    Vec proj = z * c;
    double s = 0.0;
    for (Eigen::Index i = 0; i < proj.size(); ++i) s += std::exp(proj[i]);
    return s;
}

}  // namespace

IsotropyProfile isotropy_profile(const RepresentationMatrix& z, int probes, int refine_steps,
                                 std::uint64_t seed) {
    if (!z.normalized) throw ShapeError("isotropy_profile expects row-normalized input");
    if (probes < 2) throw Error("need at least 2 probes");
    Rng rng(seed);

    IsotropyProfile out;
    out.probes = probes;
    std::vector<Vec> dirs(static_cast<std::size_t>(probes));
    std::vector<double> raw(static_cast<std::size_t>(probes));
    int best = 0;
    for (int p = 0; p < probes; ++p) {
        dirs[p] = rng.unit_sphere(z.d());
        raw[p] = partition_value(z.m, dirs[p]);
        if (raw[p] > raw[best]) best = p;
    }

    double max_est = raw[best];
    Vec c = dirs[best];
    for (int t = 0; t < refine_steps; ++t) {
        Vec w = (z.m * c).array().exp();
        Vec g = z.m.transpose() * w;
        g -= c.dot(g) * c;  // tangent projection
        const double gn = g.norm();
        if (gn < 1e-300) break;
        c += 0.1 * g / gn;
        c /= c.norm();
        max_est = std::max(max_est, partition_value(z.m, c));
    }

    out.max_estimate = max_est;
    out.normalized_values.resize(raw.size());
    for (std::size_t p = 0; p < raw.size(); ++p) out.normalized_values[p] = raw[p] / max_est;
    return out;
}

SimilarityProfile component_similarity_profile(const RepresentationMatrix& a,
                                               std::size_t max_pairs, std::uint64_t seed) {
    if (a.d() < 2) throw TooFewColumns("need at least 2 columns");
    SimilarityProfile out;

    std::vector<Eigen::Index> live;
    std::vector<double> norms(static_cast<std::size_t>(a.d()));
    for (Eigen::Index j = 0; j < a.d(); ++j) {
        norms[static_cast<std::size_t>(j)] = a.m.col(j).norm();
        if (norms[static_cast<std::size_t>(j)] > 1e-12)
            live.push_back(j);
        else
            out.skipped_columns.push_back(j);
    }
    const std::size_t l = live.size();
    if (l < 2) throw TooFewColumns("fewer than 2 live columns");

    const std::size_t total = l * (l - 1) / 2;
    std::vector<std::size_t> chosen;
    if (total <= max_pairs) {
        chosen.resize(total);
        for (std::size_t t = 0; t < total; ++t) chosen[t] = t;
    } else {
        // Floyd's uniform k-subset of [0, total)
        Rng rng(seed);
        std::vector<bool> in(total, false);
        for (std::size_t j = total - max_pairs; j < total; ++j) {
            std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
            if (in[t]) t = j;
            in[t] = true;
            chosen.push_back(t);
        }
        std::sort(chosen.begin(), chosen.end());
    }

    // map a linear pair index to (i, j), i < j over live columns
    std::size_t row = 0, row_start = 0, row_len = l - 1;
    for (std::size_t lin : chosen) {
        while (lin >= row_start + row_len) {
            row_start += row_len;
            --row_len;
            ++row;
        }
        const std::size_t i = row;
        const std::size_t j = row + 1 + (lin - row_start);
        const Eigen::Index ci = live[i], cj = live[j];
        double cs = a.m.col(ci).dot(a.m.col(cj)) /
                    (norms[static_cast<std::size_t>(ci)] * norms[static_cast<std::size_t>(cj)]);
        cs = std::clamp(cs, -1.0, 1.0);
        out.values.push_back(cs);
        out.pairs.emplace_back(ci, cj);
    }
    return out;
}

std::pair<Eigen::Index, std::vector<Eigen::Index>> dead_units(const RepresentationMatrix& a,
                                                              double threshold) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < a.d(); ++j)
        if (a.m.col(j).cwiseAbs().maxCoeff() <= threshold) idx.push_back(j);
    return {static_cast<Eigen::Index>(idx.size()), idx};
}

double gaussian_total_correlation(const Mat& cov) {
    check_symmetric(cov);
    EigDecomposition eig = sym_eigh(cov);
    const Eigen::Index d = cov.rows();
    if (eig.eigenvalues[d - 1] <= 1e-12)
        throw NotPositiveDefinite("smallest eigenvalue " + std::to_string(eig.eigenvalues[d - 1]));
    double log_det = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) log_det += std::log(eig.eigenvalues[k]);
    double log_diag = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) log_diag += std::log(cov(i, i));
    double tc = 0.5 * (log_diag - log_det);
    if (tc < 0.0 && tc > -1e-12) tc = 0.0;
    return tc;
}

DiagnosticsReport full_report(const RepresentationMatrix& h, std::uint64_t seed, int isotropy_probes,
                              std::size_t max_pairs) {
    DiagnosticsReport rep;
    const RepresentationMatrix z = h.normalized ? h : normalize_rows(h);
    const Spectrum spec = spectrum(z, SpectrumPath::Auto);

    rep.entropy = vne(spec);
    rep.spectrum_log10.resize(static_cast<std::size_t>(spec.eigenvalues.size()));
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
        rep.spectrum_log10[static_cast<std::size_t>(k)] =
            spec.eigenvalues[k] > kEpsDrop ? std::log10(spec.eigenvalues[k])
                                           : std::numeric_limits<double>::quiet_NaN();
    rep.rank_surrogate = rank_surrogate(spec);
    rep.rank_bound_gap = rank_bound_gap(spec);
    rep.isotropy = isotropy_profile(z, isotropy_probes, 200, seed);
    rep.disentanglement = component_similarity_profile(h, max_pairs, seed + 1);
    auto [dead, idx] = dead_units(h);
    rep.dead_units = dead;
    rep.dead_unit_indices = std::move(idx);
    return rep;
}

}  // namespace vne
