#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vne/entropy.hpp"
#include "vne/repr.hpp"

namespace vne {

struct IsotropyProfile {
    std::vector<double> normalized_values;  // probe partition values / max_estimate
    double max_estimate = 0.0;              // estimated max over the unit sphere
    int probes = 0;

    double mean() const;
    double min() const;
};

struct SimilarityProfile {
    std::vector<double> values;                            // cosine per sampled pair
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // original column ids
    std::vector<Eigen::Index> skipped_columns;             // norm <= 1e-12, not sampled
    std::size_t pair_count() const { return values.size(); }

    double mean_abs() const;
    double p95_abs() const;  // nearest-rank 95th percentile of |cos|
};

struct DiagnosticsReport {
    VneValue entropy;
    std::vector<double> spectrum_log10;  // descending; NaN marks a dropped eigenvalue
    Eigen::Index rank_surrogate = 0;
    double rank_bound_gap = 0.0;
    IsotropyProfile isotropy;
    SimilarityProfile disentanglement;
    Eigen::Index dead_units = 0;
    std::vector<Eigen::Index> dead_unit_indices;
};

// smallest k whose leading eigenvalues reach energy * (total eigenvalue mass);
// the threshold comparison is inclusive
Eigen::Index rank_surrogate(const Spectrum& spec, double energy = 0.99);

// ln(#{lambda > eps_rank}) - S(spec); nonnegative up to round-off
double rank_bound_gap(const Spectrum& spec, double eps_rank = 1e-10);

/// Normalized partition profile: samples `probes` unit directions c, evaluates
// Z(c) = sum_i exp(c . z_i), then estimates max_{|c|=1} Z(c) by projected
// gradient ascent (unit-tangent step 0.1, refine_steps iterations) started at
// the best probe, keeping a running max so the estimate dominates every probe.
IsotropyProfile isotropy_profile(const RepresentationMatrix& z, int probes = 512,
                                 int refine_steps = 200, std::uint64_t seed = 0);

// Cosine similarity over up to max_pairs distinct column pairs, sampled
// uniformly without replacement; near-zero columns are skipped.
SimilarityProfile component_similarity_profile(const RepresentationMatrix& a,
                                               std::size_t max_pairs = 2000,
                                               std::uint64_t seed = 0);

// a unit j is dead iff max_i |A(i,j)| <= threshold
std::pair<Eigen::Index, std::vector<Eigen::Index>> dead_units(const RepresentationMatrix& a,
                                                              double threshold = 1e-7);

// 0.5 (sum_i ln cov_ii - ln det cov) for a positive-definite covariance;
// the log-determinant comes from the symmetric eigensolver
double gaussian_total_correlation(const Mat& cov);

DiagnosticsReport full_report(const RepresentationMatrix& h, std::uint64_t seed = 0,
                              int isotropy_probes = 512, std::size_t max_pairs = 2000);

}  // namespace vne
