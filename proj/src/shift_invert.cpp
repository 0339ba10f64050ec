#include "shift_invert.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "modeconv/errors.hpp"

namespace modeconv::detail {

std::vector<EigenPair> shift_invert_eigs(const SparseMatrix& a, double sigma, const ShiftInvertOptions& options) {
  const Eigen::Index n = a.rows();
  const int wanted = std::min<int>(options.wanted, static_cast<int>(n));
  const int m = std::clamp<int>(options.krylov_dim, wanted + 2, static_cast<int>(n));

  SparseMatrix shifted = a;
  for (Eigen::Index k = 0; k < n; ++k) shifted.coeffRef(k, k) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw NumericError("shift-invert: factorization failed: " + lu.lastErrorMessage());

  std::mt19937 rng(20150827u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd start(n);
  for (Eigen::Index k = 0; k < n; ++k) start[k] = dist(rng);

  Eigen::MatrixXd basis(n, m + 1);
  Eigen::MatrixXd hess(m + 1, m);
  std::vector<EigenPair> pairs;
  double worst = 0.0;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    basis.setZero();
    hess.setZero();
    basis.col(0) = start / start.norm();
    int steps = m;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = lu.solve(basis.col(j));
      // two passes of classical Gram-Schmidt
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = basis.leftCols(j + 1).transpose() * w;
        w.noalias() -= basis.leftCols(j + 1) * h;
        hess.col(j).head(j + 1) += h;
      }
      const double norm = w.norm();
      hess(j + 1, j) = norm;
      if (norm < 1e-14 * hess.col(j).head(j + 1).norm()) {
        steps = j + 1;
        break;
      }
      basis.col(j + 1) = w / norm;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(hess.topLeftCorner(steps, steps));
    if (es.info() != Eigen::Success) throw NumericError("shift-invert: Hessenberg eigensolve failed");
    const Eigen::VectorXcd theta = es.eigenvalues();
    std::vector<int> order(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) order[static_cast<std::size_t>(k)] = k;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const double ax = std::abs(theta[x]);
      const double ay = std::abs(theta[y]);
      if (ax != ay) return ax > ay;
      return x < y;
    });

    pairs.clear();
    worst = 0.0;
    bool converged = true;
    Eigen::VectorXd next_start = Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXcd vecs = es.eigenvectors();
    for (int k = 0; k < std::min(wanted, steps); ++k) {
      const int idx = order[static_cast<std::size_t>(k)];
      Eigen::VectorXcd y = vecs.col(idx);
      Eigen::Index big = 0;
      y.cwiseAbs().maxCoeff(&big);
      y *= std::conj(y[big]) / std::abs(y[big]);
      Eigen::VectorXd x = basis.leftCols(steps) * y.real();
      x /= x.norm();
      const double value = sigma + (1.0 / theta[idx]).real();
      const double residual = (a * x - value * x).norm() / std::abs(value);
      pairs.push_back({value, x, residual});
      if (options.must_converge(value)) {
        worst = std::max(worst, residual);
        if (residual > options.tolerance) converged = false;
      }
      next_start += x;
    }
    if (converged) {
      std::sort(pairs.begin(), pairs.end(), [](const EigenPair& p, const EigenPair& q) { return p.value > q.value; });
      return pairs;
    }
    start = next_start;
  }
  std::ostringstream os;
  os << "shift-invert: no convergence after " << options.max_restarts << " restarts (krylov_dim " << m
     << ", worst relative residual " << worst << ", tolerance " << options.tolerance << ")";
  throw NumericError(os.str());
}

}  // namespace modeconv::detail
