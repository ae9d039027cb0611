#include "oscdmrg/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscdmrg/errors.hpp"

namespace oscdmrg {

namespace {
constexpr double kNegativeFloor = -1e-8;
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
    throw InvalidDensityError("density matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw InvalidDensityError("density matrix has non-finite entries");
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidDensityError("density matrix is not symmetric");
  }
  if (std::abs(entries_.trace() - 1.0) > 1e-10) {
    throw InvalidDensityError("density matrix trace " + std::to_string(entries_.trace()) + " != 1");
  }
}

DensityMatrix site_rdm(const FullState& state, int site) {
  state.validate();
  if (site < 0 || site >= state.n_sites) {
    throw ArgumentError("site " + std::to_string(site) + " outside 0.." + std::to_string(state.n_sites - 1));
  }
  const Eigen::Index d = state.site_dim;
  Eigen::Index left = 1;
  for (int i = 0; i < site; ++i) left *= d;
  const Eigen::Index right = state.amplitudes.size() / (left * d);

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix rho = Matrix::Zero(d, d);
  for (Eigen::Index l = 0; l < left; ++l) {
    Eigen::Map<const RowMajor> slice(state.amplitudes.data() + l * d * right, d, right);
    rho.noalias() += slice * slice.transpose();
  }
  return DensityMatrix(0.5 * (rho + rho.transpose()));
}

std::vector<double> density_spectrum(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.entries(), Eigen::EigenvaluesOnly);
  std::vector<double> lambdas(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + solver.eigenvalues().size());
  std::reverse(lambdas.begin(), lambdas.end());
  for (double& l : lambdas) {
    if (l < kNegativeFloor) {
      throw InvalidDensityError("density matrix eigenvalue " + std::to_string(l) + " is negative");
    }
    l = std::max(l, 0.0);
  }
  return lambdas;
}

double spectrum_entropy(std::span<const double> lambdas) {
  double s = 0.0;
  for (double l : lambdas) {
    if (l < kNegativeFloor) {
      throw InvalidDensityError("spectrum value " + std::to_string(l) + " is negative");
    }
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

double von_neumann(const DensityMatrix& rho) { return spectrum_entropy(density_spectrum(rho)); }

double average_local_entanglement(std::span<const DensityMatrix> rdms) {
  if (rdms.empty()) throw ArgumentError("average_local_entanglement: no sites");
  double sum = 0.0;
  for (const auto& rho : rdms) sum += von_neumann(rho);
  return sum / static_cast<double>(rdms.size());
}

}  // namespace oscdmrg
