#include "vne/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace vne {

double offdiag_frobenius(const Mat& m) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

void check_symmetric(const Mat& m) {
    if (m.rows() != m.cols()) throw NonSymmetric("matrix is not square");
    const double scale = std::max(1.0, m.norm());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                throw NonSymmetric("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") breaks symmetry beyond tolerance");
}

EigDecomposition sym_eigh(const Mat& m) {
    check_symmetric(m);
    const Eigen::Index n = m.rows();
    Mat a = (m + m.transpose()) * 0.5;  // fold round-off asymmetry
    Mat u = Mat::Identity(n, n);

    const double total = std::max(a.norm(), 1e-300);
    const double stop = 1e-13 * total;

    bool converged = offdiag_frobenius(a) < stop;
    for (int sweep = 0; sweep < 64 && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                // classical stable rotation: tan via the smaller root
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double ukp = u(k, p), ukq = u(k, q);
                    u(k, p) = c * ukp - s * ukq;
                    u(k, q) = s * ukp + c * ukq;
                }
            }
        }
        converged = offdiag_frobenius(a) < stop;
    }
    if (!converged) throw NoConvergence("jacobi sweep cap (64) exceeded");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    EigDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.eigenvectors.col(k) = u.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

}  // namespace vne
