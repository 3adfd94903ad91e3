#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vne/rng.hpp"

namespace vne {

struct VerifyOutcome {
    std::string suite;
    int trials = 0;
    double tolerance = 0.0;        // pass iff worst_violation <= tolerance
    double worst_violation = 0.0;  // <= 0 means every sub-check held with margin
    bool pass = false;
    std::string details;
};

// Representation whose autocorrelation spectrum consists entirely of doubled
// eigenvalues: unit-row A placed twice on a block diagonal, rotated by a random
// orthogonal matrix, all rows scaled by `scale`. Exercises the repeated-eigenvalue
// branch of the gradient while keeping the gradient itself well-conditioned.
Mat repeated_spectrum_fixture(Eigen::Index half_rows, Eigen::Index half_cols, double scale, Rng& rng);

// 0 <= S <= ln min(n, d) over random shapes, scalings, and collapse fixtures.
VerifyOutcome verify_entropy_bounds(int trials = 1000, std::uint64_t seed = 1);

// Covariance-side and Gram-side spectra agree eigenvalue-by-eigenvalue, and so
// do the entropies, whenever both paths apply (n <= d).
VerifyOutcome verify_path_equivalence(int trials = 500, std::uint64_t seed = 2);

// Analytic entropy gradient against central finite differences on sampled
// entries; one in four trials uses the repeated-spectrum fixture.
VerifyOutcome verify_gradient(int trials = 200, std::uint64_t seed = 3);

// S <= ln rank with equality on flat spectra: random matrices must keep the
// gap nonnegative, replicated orthonormal frames must close it.
VerifyOutcome verify_rank_bound(int trials = 500, std::uint64_t seed = 4);

// Entropy ascent on unit-row factors of a correlated Gaussian drives the total
// correlation of the induced covariance to zero and the entropy to ln d.
// Trials: one equicorrelated start (rho = 0.5) plus four random starts.
VerifyOutcome verify_disentanglement(Eigen::Index d = 16, int steps = 500, std::uint64_t seed = 5);

// After entropy maximization the normalized partition function should be nearly
// constant over the sphere (mean >= 0.95 of the estimated max). At desk scale
// the mean saturates near exp(-1/sqrt(n)), so this records how far the
// finite-width run lands from the idealized claim rather than forcing it.
VerifyOutcome verify_isotropy_theorem(Eigen::Index n = 8, Eigen::Index d = 32, int steps = 2000,
                                      std::uint64_t seed = 42);

// All six batteries with default parameters, in a stable order.
std::vector<VerifyOutcome> verify_all();

}  // namespace vne
