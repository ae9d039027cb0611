#pragma once

// Single-site reduced density matrices and von Neumann entropies (in nats).

#include <span>

#include "oscdmrg/exact.hpp"

namespace oscdmrg {

class DensityMatrix {
 public:
  /// Validates symmetry (1e-10) and unit trace (1e-10).
  explicit DensityMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double trace() const { return entries_.trace(); }

 private:
  Matrix entries_;
};

/// rho_site = Tr_{all others} |psi><psi|, site in 0..n_sites-1.
DensityMatrix site_rdm(const FullState& state, int site);

/// Eigenvalues of rho in descending order, clamped at zero for values down to
/// -1e-8. Throws InvalidDensityError below that.
std::vector<double> density_spectrum(const DensityMatrix& rho);

/// -sum lambda ln lambda with 0 ln 0 = 0.
double von_neumann(const DensityMatrix& rho);

/// Entropy of a probability spectrum; same conventions as von_neumann().
double spectrum_entropy(std::span<const double> lambdas);

/// Mean of the per-site entropies over all sites.
double average_local_entanglement(std::span<const DensityMatrix> rdms);

}  // namespace oscdmrg
