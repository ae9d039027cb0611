#include "oscdmrg/fock.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "oscdmrg/errors.hpp"

namespace oscdmrg {

namespace {

void require_dim(int d) {
  if (d < 2) throw ArgumentError("local dimension must be >= 2, got " + std::to_string(d));
}

void require_hbar(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ArgumentError("hbar must be positive and finite");
}

}  // namespace

LadderOps ladder_ops(int d) {
  require_dim(d);
  LocalOperator a = LocalOperator::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) a(i, i + 1) = std::sqrt(static_cast<double>(i + 1));
  LocalOperator at = a.transpose();
  return {std::move(a), std::move(at)};
}

LocalOperator displacement_op(int d) {
  auto ops = ladder_ops(d);
  return ops.create + ops.annihilate;
}

LocalOperator position_op(int d, double hbar) {
  require_hbar(hbar);
  const double c = std::sqrt(hbar) / (std::numbers::sqrt2 * std::pow(2.0, 0.25));
  return c * displacement_op(d);
}

LocalOperator momentum_op(int d, double hbar) {
  require_hbar(hbar);
  auto ops = ladder_ops(d);
  const double k = std::pow(2.0, 0.25) * std::sqrt(hbar) / std::numbers::sqrt2;
  return k * (ops.create - ops.annihilate);
}

LocalOperator onsite_term(int d, double hbar) {
  require_dim(d);
  require_hbar(hbar);
  LocalOperator h = LocalOperator::Zero(d, d);
  for (int k = 0; k < d; ++k) h(k, k) = std::numbers::sqrt2 * hbar * (k + 0.5);
  return h;
}

double bond_coefficient(double hbar) {
  require_hbar(hbar);
  return -std::numbers::sqrt2 * hbar / 4.0;
}

LocalOperator kron(const LocalOperator& a, const LocalOperator& b, Eigen::Index entry_cap) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows != 0 && cols > entry_cap / rows) {
    throw ResourceError("kron result " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds entry cap");
  }
  LocalOperator out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    }
  }
  return out;
}

SiteBasis::SiteBasis(Matrix transform) : transform_(std::move(transform)) {
  if (transform_.cols() < 1 || transform_.cols() > transform_.rows()) {
    throw ArgumentError("site basis must be m x n with 1 <= n <= m");
  }
  const Matrix gram = transform_.transpose() * transform_;
  const Matrix eye = Matrix::Identity(gram.rows(), gram.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10) {
    throw ArgumentError("site basis columns are not orthonormal");
  }
}

SiteBasis SiteBasis::bare(int bare_dim, int kept_dim) {
  if (kept_dim < 1 || kept_dim > bare_dim) {
    throw ArgumentError("kept_dim must lie in 1.." + std::to_string(bare_dim));
  }
  return SiteBasis(Matrix::Identity(bare_dim, kept_dim));
}

LocalOperator project(const LocalOperator& op, const SiteBasis& basis) {
  if (op.rows() != basis.bare_dim() || op.cols() != basis.bare_dim()) {
    throw ArgumentError("operator dimension " + std::to_string(op.rows()) +
                        " does not match basis bare_dim " + std::to_string(basis.bare_dim()));
  }
  return basis.transform().transpose() * op * basis.transform();
}

}  // namespace oscdmrg
