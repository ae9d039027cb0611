#include "oscdmrg/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oscdmrg/errors.hpp"

namespace oscdmrg {

namespace {

// Portable across standard libraries, unlike std::uniform_real_distribution.
Vector random_unit_vector(Eigen::Index dim, std::mt19937_64& rng) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  return v / v.norm();
}

// Removes the components along the first `cols` columns of basis. A second
// pass runs only when the first one cancelled most of the norm.
double orthogonalize(const Matrix& basis, Eigen::Index cols, Vector& v) {
  double norm = v.norm();
  for (int pass = 0; pass < 3 && cols > 0; ++pass) {
    const Vector overlaps = basis.leftCols(cols).transpose() * v;
    v.noalias() -= basis.leftCols(cols) * overlaps;
    const double reduced = v.norm();
    const bool done = reduced > 0.7 * norm;
    norm = reduced;
    if (done) break;
  }
  return norm;
}

int pick_basis_size(Eigen::Index dim, int k, int requested) {
  Eigen::Index size = requested > 0 ? requested : std::max(2 * k + 40, 80);
  // Keep the two dim x size work arrays below ~400 MB.
  const Eigen::Index memory_cap = std::max<Eigen::Index>(k + 10, Eigen::Index{25'000'000} / dim);
  size = std::min({size, memory_cap, dim});
  return static_cast<int>(std::max<Eigen::Index>(size, std::min<Eigen::Index>(k + 1, dim)));
}

}  // namespace

EigResult lowest_k(const LinearMap& apply, Eigen::Index dim, int k, const LanczosOptions& opts) {
  if (k < 1 || k > dim) {
    throw ArgumentError("lowest_k: k=" + std::to_string(k) + " outside 1.." + std::to_string(dim));
  }
  if (!(opts.tol > 0.0)) throw ArgumentError("lowest_k: tol must be positive");

  const int max_basis = pick_basis_size(dim, k, opts.max_basis);
  std::mt19937_64 rng(opts.seed);

  Matrix basis(dim, max_basis);     // orthonormal Krylov vectors
  Matrix images(dim, max_basis);    // A applied to each basis vector
  Matrix projected = Matrix::Zero(max_basis, max_basis);
  Vector next = random_unit_vector(dim, rng);
  if (opts.start.size() == dim && opts.start.allFinite() && opts.start.norm() > 0.0) {
    next = opts.start / opts.start.norm() + 1e-3 * next;
    next /= next.norm();
  } else if (opts.start.size() != 0 && opts.start.size() != dim) {
    throw ArgumentError("lowest_k: start vector has the wrong dimension");
  }
  Vector image(dim);
  // Ritz pairs are checked at geometrically spaced sizes so small or
  // well-started problems stop before the basis is full.
  auto next_check = [&](int from) { return from + std::max(10, from / 2); };

  int cols = 0;
  int iterations = 0;
  std::vector<double> residuals(k, 0.0);

  while (true) {
    const int check_at = next_check(cols);
    while (cols < max_basis && iterations < opts.max_iter) {
      if (cols >= check_at && cols >= k) break;
      double norm = orthogonalize(basis, cols, next);
      // Invariant subspace found: continue from a fresh random direction.
      for (int attempt = 0; norm < 1e-10 && attempt < 8; ++attempt) {
        next = random_unit_vector(dim, rng);
        norm = orthogonalize(basis, cols, next);
      }
      if (norm < 1e-10) break;
      basis.col(cols) = next / norm;
      apply(basis.col(cols), image);
      ++iterations;
      images.col(cols) = image;
      const Vector overlaps = basis.leftCols(cols + 1).transpose() * image;
      projected.block(0, cols, cols + 1, 1) = overlaps;
      projected.block(cols, 0, 1, cols + 1) = overlaps.transpose();
      next = image - basis.leftCols(cols + 1) * overlaps;
      ++cols;
    }
    if (cols < k) {
      throw ConvergenceError("lowest_k: Krylov space collapsed below k vectors", residuals);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> ritz(projected.topLeftCorner(cols, cols));
    const Vector& theta = ritz.eigenvalues();
    const Matrix& coeffs = ritz.eigenvectors();

    EigResult result;
    bool converged = true;
    for (int i = 0; i < k; ++i) {
      Vector v = basis.leftCols(cols) * coeffs.col(i);
      const Vector av = images.leftCols(cols) * coeffs.col(i);
      const double nv = v.norm();
      const double r = (av - theta[i] * v).norm() / nv;
      residuals[i] = r;
      converged = converged && r <= opts.tol * std::max(1.0, std::abs(theta[i]));
      result.values.push_back(theta[i]);
      result.vectors.push_back(v / nv);
    }
    // A full-dimensional Krylov space is exact up to rounding.
    if (converged || cols == dim) {
      result.residual_norms = residuals;
      result.iterations = iterations;
      return result;
    }
    if (cols < max_basis && iterations < opts.max_iter) continue;
    if (iterations >= opts.max_iter) {
      throw ConvergenceError("lowest_k: no convergence after " + std::to_string(iterations) +
                                 " matrix-vector products",
                             residuals);
    }

    // Thick restart on the lowest Ritz vectors. `next` is still the residual
    // direction of the last expansion and stays orthogonal to their span.
    const int keep = std::min(cols - 1, std::max(k + 10, max_basis / 2));
    const Matrix kept_basis = basis.leftCols(cols) * coeffs.leftCols(keep);
    const Matrix kept_images = images.leftCols(cols) * coeffs.leftCols(keep);
    basis.leftCols(keep) = kept_basis;
    images.leftCols(keep) = kept_images;
    projected.setZero();
    projected.topLeftCorner(keep, keep) = theta.head(keep).asDiagonal();
    cols = keep;
  }
}

EigResult dense_sym_eig(const LocalOperator& mat) {
  if (mat.rows() != mat.cols()) throw ArgumentError("dense_sym_eig: matrix is not square");
  if (!mat.allFinite()) throw ArgumentError("dense_sym_eig: non-finite entries");
  const Matrix sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw ArgumentError("dense_sym_eig: decomposition failed");

  EigResult result;
  for (Eigen::Index i = 0; i < sym.rows(); ++i) {
    const double lambda = solver.eigenvalues()[i];
    Vector v = solver.eigenvectors().col(i);
    result.residual_norms.push_back((sym * v - lambda * v).norm());
    result.values.push_back(lambda);
    result.vectors.push_back(std::move(v));
  }
  return result;
}

}  // namespace oscdmrg
