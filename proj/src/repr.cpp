#include "vne/repr.hpp"

#include <algorithm>
#include <cmath>

namespace vne {

namespace {

Vec clamp_and_pad(const Vec& raw, Eigen::Index d) {
    // raw comes out of sym_eigh descending; clamp round-off negatives, pad to d
    Vec out = Vec::Zero(d);
    for (Eigen::Index k = 0; k < raw.size(); ++k) out[k] = std::max(raw[k], 0.0);
    return out;
}

}  // namespace

RepresentationMatrix normalize_rows(const RepresentationMatrix& h) {
    RepresentationMatrix z;
    z.m.resize(h.n(), h.d());
    for (Eigen::Index i = 0; i < h.n(); ++i) {
        const double norm = h.m.row(i).norm();
        if (norm <= 1e-30) throw ZeroRow(static_cast<std::size_t>(i));
        z.m.row(i) = h.m.row(i) / norm;
    }
    z.normalized = true;
    return z;
}

Mat autocorrelation(const RepresentationMatrix& z) {
    if (!z.normalized) throw ShapeError("autocorrelation expects row-normalized input");
    return z.m.transpose() * z.m / static_cast<double>(z.n());
}

Spectrum gram_spectrum(const RepresentationMatrix& z) {
    if (!z.normalized) throw ShapeError("gram_spectrum expects row-normalized input");
    if (z.n() > z.d())
        throw ShapeError("gram path needs n <= d (got n=" + std::to_string(z.n()) +
                         ", d=" + std::to_string(z.d()) + ")");
    const Mat gram = z.m * z.m.transpose() / static_cast<double>(z.n());
    EigDecomposition eig = sym_eigh(gram);
    Spectrum s;
    s.eigenvalues = clamp_and_pad(eig.eigenvalues, z.d());
    s.source_path = SpectrumPath::Gram;
    return s;
}

Spectrum spectrum(const RepresentationMatrix& z, SpectrumPath path) {
    if (!z.normalized) throw ShapeError("spectrum expects row-normalized input");
    if (path == SpectrumPath::Auto)
        path = (z.n() < z.d()) ? SpectrumPath::Gram : SpectrumPath::FullEigh;
    if (path == SpectrumPath::Gram) return gram_spectrum(z);

    EigDecomposition eig = sym_eigh(autocorrelation(z));
    Spectrum s;
    s.eigenvalues = clamp_and_pad(eig.eigenvalues, z.d());
    s.source_path = SpectrumPath::FullEigh;
    return s;
}

}  // namespace vne
