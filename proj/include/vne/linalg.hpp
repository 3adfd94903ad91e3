#pragma once

#include <Eigen/Dense>

#include "vne/errors.hpp"

namespace vne {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct EigDecomposition {
    Vec eigenvalues;   // descending, ties broken by original index
    Mat eigenvectors;  // column k pairs with eigenvalues[k]
};

// Cyclic Jacobi for dense symmetric matrices. Deterministic: fixed sweep
// order, convergence when the off-diagonal Frobenius norm drops below
// 1e-13 * ||M||_F, hard cap of 64 sweeps.
EigDecomposition sym_eigh(const Mat& m);

double offdiag_frobenius(const Mat& m);

void check_symmetric(const Mat& m);  // throws NonSymmetric

}  // namespace vne
