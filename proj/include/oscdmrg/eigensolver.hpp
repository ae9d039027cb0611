#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "oscdmrg/fock.hpp"

namespace oscdmrg {

/// y = A x for a real symmetric operator A. `y` arrives sized but unspecified.
using LinearMap = std::function<void(const Vector& x, Vector& y)>;

struct EigResult {
  std::vector<double> values;           // ascending
  std::vector<Vector> vectors;          // orthonormal
  std::vector<double> residual_norms;   // ||A v - lambda v||
  int iterations = 0;                   // matrix-vector products
};

struct LanczosOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  std::uint64_t seed = 12345;
  /// Krylov space size before a restart; 0 picks a size from k and dim.
  int max_basis = 0;
  /// Optional start vector (e.g. a previous solution); random when empty.
  /// A small seeded random admixture keeps every eigenvector reachable.
  Vector start;
};

/// The k algebraically smallest eigenpairs of a symmetric operator known only
/// through its action. Lanczos with full reorthogonalization and thick
/// restarts that keep the lowest Ritz vectors. Random components come from a
/// generator seeded with `opts.seed`, so results are reproducible.
///
/// Converged when every residual satisfies ||A v - lambda v|| <= tol max(1, |lambda|).
/// Throws ArgumentError for k outside 1..dim, ConvergenceError when max_iter
/// matrix-vector products are exhausted.
EigResult lowest_k(const LinearMap& apply, Eigen::Index dim, int k, const LanczosOptions& opts = {});

/// Full spectrum of a symmetric matrix (symmetrized before decomposing).
EigResult dense_sym_eig(const LocalOperator& mat);

}  // namespace oscdmrg
