#include <cmath>
#include <set>

#include <doctest.h>

#include "vne/diagnostics.hpp"
#include "vne/errors.hpp"
#include "vne/repr.hpp"
#include "vne/rng.hpp"

using namespace vne;

namespace {

Spectrum spectrum_of(std::initializer_list<double> values) {
    Vec lam(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) lam[k++] = v;
    return Spectrum{lam, SpectrumPath::FullEigh};
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("rank surrogate: inclusive cumulative threshold") {
    const Spectrum s = spectrum_of({0.6, 0.3, 0.05, 0.05});
    CHECK(rank_surrogate(s, 0.99) == 4);
    CHECK(rank_surrogate(s, 0.9) == 2);   // 0.9 reaches the target inclusively
    CHECK(rank_surrogate(s, 0.5) == 1);
    CHECK(rank_surrogate(spectrum_of({1.0, 0.0, 0.0})) == 1);
    CHECK(rank_surrogate(spectrum_of({0.7, 0.2, 0.09, 0.01}), 0.99) == 3);
    CHECK(rank_surrogate(Spectrum{Vec::Constant(64, 1.0 / 64), SpectrumPath::FullEigh}, 0.99) ==
          64);
}

TEST_CASE("rank bound gap: zero on flat spectra, nonnegative in general") {
    Vec flat = Vec::Constant(4, 0.25);
    CHECK(std::abs(rank_bound_gap(Spectrum{flat, SpectrumPath::FullEigh})) < 1e-12);

    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        const RepresentationMatrix z = normalize_rows({rng.gaussian_matrix(6, 9), false});
        CHECK(rank_bound_gap(spectrum(z)) >= -1e-9);
    }

    CHECK_THROWS_AS(rank_bound_gap(spectrum_of({0.0, 0.0})), DegenerateSpectrum);
}

TEST_CASE("dead units: threshold splits columns exactly") {
    Mat a = Mat::Zero(5, 4);
    a.col(0).setConstant(0.2);
    a(2, 1) = 1e-6;   // alive
    a(3, 3) = 1e-8;   // dead at the 1e-7 threshold
    const auto [count, idx] = dead_units({a, false});
    CHECK(count == 2);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 2);
    CHECK(idx[1] == 3);
}

TEST_CASE("gaussian total correlation: closed form, invariances, guards") {
    Mat c(2, 2);
    c << 1.0, 0.5, 0.5, 1.0;
    // -0.5 * ln(1 - rho^2)
    CHECK(gaussian_total_correlation(c) == doctest::Approx(0.14384103622589045).epsilon(1e-13));
    CHECK(gaussian_total_correlation(Mat(3.0 * c)) ==
          doctest::Approx(gaussian_total_correlation(c)).epsilon(1e-12));

    Vec d(3);
    d << 2.0, 0.5, 1.0;
    CHECK(gaussian_total_correlation(Mat(d.asDiagonal())) == 0.0);

    Mat singular(2, 2);
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(gaussian_total_correlation(singular), NotPositiveDefinite);
}

TEST_CASE("isotropy: two orthonormal directions in the plane") {
    Mat h = Mat::Identity(2, 2);
    const IsotropyProfile p = isotropy_profile({h, true}, 512, 200, 0);
    // mean over the circle of [exp(cos t) + exp(sin t)] / (2 exp(1/sqrt 2))
    // = I0(1) / exp(1/sqrt 2) = 0.6243, plus Monte-Carlo scatter at 512 probes
    CHECK(std::abs(p.mean() - 0.6243) < 0.03);
    CHECK(p.probes == 512);
    for (double v : p.normalized_values) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("isotropy: collapsed rows give a lopsided profile") {
    Rng rng(3);
    const RepresentationMatrix z = normalize_rows({rng.gaussian_matrix(1, 8).replicate(16, 1), false});
    const IsotropyProfile p = isotropy_profile(z, 512, 200, 7);
    CHECK(p.min() < 0.5);
}

TEST_CASE("isotropy: square orthonormal frame saturates near its finite-width ceiling") {
    Rng rng(5);
    Mat g = rng.gaussian_matrix(16, 16);
    Mat sym = g + g.transpose();
    const Mat u = sym_eigh(sym).eigenvectors;  // orthonormal columns
    const IsotropyProfile p = isotropy_profile({Mat(u.transpose()), true}, 512, 200, 11);
    // the mean normalized partition value cannot exceed ~exp(-1/sqrt(n)) at n = 16
    CHECK(p.mean() > 0.75);
    CHECK(p.mean() < 0.85);
}

TEST_CASE("isotropy: rejects degenerate probe counts") {
    CHECK_THROWS_AS(isotropy_profile({Mat::Identity(2, 2), true}, 1, 10, 0), Error);
}

TEST_CASE("component similarity: exhaustive below the cap") {
    Mat a(4, 3);
    a.col(0) << 1, 2, 3, 4;
    a.col(1) = 2.0 * a.col(0);  // cosine exactly 1 with column 0
    a.col(2) << -2, 1, 0, 0;    // orthogonal to column 0
    const SimilarityProfile p = component_similarity_profile({a, false}, 2000, 0);
    REQUIRE(p.pair_count() == 3);
    CHECK(p.values[0] == doctest::Approx(1.0).epsilon(1e-14));                     // (0,1)
    CHECK(std::abs(p.values[1]) < 1e-14);                                          // (0,2)
    CHECK(p.pairs[0].first == 0);
    CHECK(p.pairs[0].second == 1);
    CHECK(p.mean_abs() == doctest::Approx((1.0 + 0.0 + std::abs(p.values[2])) / 3.0).epsilon(1e-12));
    CHECK(p.p95_abs() == doctest::Approx(1.0).epsilon(1e-14));  // nearest-rank on 3 values
}

TEST_CASE("component similarity: zero columns are skipped and reported") {
    Mat a = Mat::Zero(4, 3);
    a.col(0) << 1, 0, 0, 0;
    a.col(2) << 0, 1, 0, 0;
    const SimilarityProfile p = component_similarity_profile({a, false}, 2000, 0);
    REQUIRE(p.skipped_columns.size() == 1);
    CHECK(p.skipped_columns[0] == 1);
    CHECK(p.pair_count() == 1);

    Mat worse = Mat::Zero(4, 2);
    worse.col(0) << 1, 0, 0, 0;
    CHECK_THROWS_AS(component_similarity_profile({worse, false}, 2000, 0), TooFewColumns);
}

TEST_CASE("component similarity: sampling caps, stays unique and deterministic") {
    Rng rng(7);
    const Mat a = rng.gaussian_matrix(10, 80);  // 3160 pairs total
    const SimilarityProfile p = component_similarity_profile({a, false}, 2000, 9);
    CHECK(p.pair_count() == 2000);
    std::set<std::pair<Eigen::Index, Eigen::Index>> uniq(p.pairs.begin(), p.pairs.end());
    CHECK(uniq.size() == 2000);
    for (const auto& [i, j] : p.pairs) {
        CHECK(i < j);
        CHECK(j < 80);
    }
    const SimilarityProfile q = component_similarity_profile({a, false}, 2000, 9);
    CHECK(p.values == q.values);
}

TEST_CASE("full report wires the pieces together") {
    Rng rng(9);
    const Mat h = rng.gaussian_matrix(16, 8);
    const DiagnosticsReport rep = full_report({h, false}, 4);
    CHECK(rep.entropy.entropy == doctest::Approx(vne_of({h, false}).entropy).epsilon(1e-14));
    CHECK(rep.spectrum_log10.size() == 8);
    CHECK(rep.rank_surrogate >= 1);
    CHECK(rep.rank_surrogate <= 8);
    CHECK(rep.rank_bound_gap >= -1e-9);
    CHECK(rep.isotropy.probes == 512);
    CHECK(rep.dead_units == 0);
}

}  // TEST_SUITE
