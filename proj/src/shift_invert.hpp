#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace modeconv::detail {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;  // ||A x - value x|| / (|value| ||x||)
};

struct ShiftInvertOptions {
  int wanted = 4;
  int krylov_dim = 40;
  double tolerance = 1e-10;
  int max_restarts = 30;
  // Ritz pairs failing this predicate need not converge (e.g. unguided box modes).
  std::function<bool(double)> must_converge = [](double) { return true; };
};

// Eigenpairs of a real (possibly non-symmetric) sparse matrix closest to `sigma` from below,
// sorted by decreasing eigenvalue. Arnoldi on (A - sigma I)^{-1} with explicit restarts and a
// fixed-seed start vector.
std::vector<EigenPair> shift_invert_eigs(const SparseMatrix& a, double sigma, const ShiftInvertOptions& options);

}  // namespace modeconv::detail
