#pragma once

#include <Eigen/Dense>

#include "vne/errors.hpp"
#include "vne/linalg.hpp"

namespace vne {

struct RepresentationMatrix {
    Mat m;                    // n samples x d features
    bool normalized = false;  // true once every row is unit length

    Eigen::Index n() const { return m.rows(); }
    Eigen::Index d() const { return m.cols(); }
};

enum class SpectrumPath { Auto, FullEigh, Gram };

struct Spectrum {
    Vec eigenvalues;  // length d, descending, clamped >= 0 (Gram path zero-padded)
    SpectrumPath source_path = SpectrumPath::FullEigh;
};

// row / ||row||; throws ZeroRow on a degenerate sample (norm <= 1e-30)
RepresentationMatrix normalize_rows(const RepresentationMatrix& h);

// Z^T Z / n for unit-row Z: PSD with unit trace
Mat autocorrelation(const RepresentationMatrix& z);

// Eigenvalues of the n x n matrix Z Z^T / n, which equal the nonzero
// eigenvalues of Z^T Z / n; cheaper whenever n < d. Requires n <= d.
Spectrum gram_spectrum(const RepresentationMatrix& z);

// Auto picks Gram strictly when n < d, FullEigh otherwise (ties -> FullEigh).
Spectrum spectrum(const RepresentationMatrix& z, SpectrumPath path = SpectrumPath::Auto);

}  // namespace vne
