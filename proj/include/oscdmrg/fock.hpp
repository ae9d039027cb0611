#pragma once

// Truncated bosonic operators for one oscillator site and the local pieces of
// the second-quantized chain Hamiltonian
//
//   H = sqrt(2) hbar sum_i (a_i^+ a_i + 1/2)
//       - (sqrt(2) hbar / 4) sum_i (a_i^+ + a_i)(a_{i+1}^+ + a_{i+1}).

#include <Eigen/Dense>

namespace oscdmrg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real operator on a (possibly renormalized) local space.
using LocalOperator = Matrix;

/// Default cap on the number of entries produced by kron().
inline constexpr Eigen::Index kKronEntryCap = Eigen::Index{1} << 24;

struct LadderOps {
  LocalOperator annihilate;
  LocalOperator create;
};

/// a|k> = sqrt(k)|k-1> on the Fock states |0>..|d-1>.
LadderOps ladder_ops(int d);

/// a^+ + a.
LocalOperator displacement_op(int d);

/// U = c (a^+ + a) with c^2 = hbar / (2 sqrt 2).
LocalOperator position_op(int d, double hbar);

/// Momentum P = i K with K = (2^{1/4} sqrt(hbar) / sqrt 2) (a^+ - a), chosen so
/// that [U, P] = i hbar on the untruncated states. Returns the real
/// antisymmetric K. Not part of the assembled Hamiltonian.
LocalOperator momentum_op(int d, double hbar);

/// sqrt(2) hbar (a^+ a + 1/2), diagonal.
LocalOperator onsite_term(int d, double hbar);

/// Coefficient of (a^+ + a)_i (a^+ + a)_{i+1}: -sqrt(2) hbar / 4.
double bond_coefficient(double hbar);

/// Tensor product, (A (x) B)[i dB + j, k dB + l] = A[i,k] B[j,l].
LocalOperator kron(const LocalOperator& a, const LocalOperator& b,
                   Eigen::Index entry_cap = kKronEntryCap);

/// Orthonormal n-dimensional subspace of an m-dimensional bare site space,
/// stored as the m x n matrix of its basis vectors.
class SiteBasis {
 public:
  /// Validates orthonormal columns (1e-10 entrywise).
  explicit SiteBasis(Matrix transform);

  /// The first n Fock states.
  static SiteBasis bare(int bare_dim, int kept_dim);

  int bare_dim() const { return static_cast<int>(transform_.rows()); }
  int kept_dim() const { return static_cast<int>(transform_.cols()); }
  const Matrix& transform() const { return transform_; }

 private:
  Matrix transform_;
};

/// transform^T op transform.
LocalOperator project(const LocalOperator& op, const SiteBasis& basis);

}  // namespace oscdmrg
