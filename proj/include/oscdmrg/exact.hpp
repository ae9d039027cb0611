#pragma once

// Exact diagonalization of the chain on the full truncated Fock space
// (bare_dim^n_sites states), used as a reference for the DMRG engine.

#include <optional>
#include <vector>

#include "oscdmrg/chain.hpp"
#include "oscdmrg/eigensolver.hpp"

namespace oscdmrg {

inline constexpr Eigen::Index kFullSpaceCap = Eigen::Index{1} << 20;
inline constexpr Eigen::Index kDenseFullSpaceCap = 4096;

/// Many-body state on n_sites sites of dimension site_dim each; site 0 is the
/// most significant digit of the amplitude index.
struct FullState {
  int n_sites = 0;
  int site_dim = 0;
  Vector amplitudes;

  /// Checks the length and that the state has unit norm (1e-10).
  void validate() const;
};

/// The chain Hamiltonian on the product space. Stored dense up to
/// kDenseFullSpaceCap states, applied matrix-free beyond that.
class FullHamiltonian {
 public:
  explicit FullHamiltonian(const ChainSpec& spec);

  Eigen::Index dim() const { return dim_; }
  const ChainSpec& spec() const { return spec_; }
  bool is_dense() const { return dense_.has_value(); }
  const std::optional<Matrix>& dense() const { return dense_; }

  void apply(const Vector& x, Vector& y) const;
  /// Matrix-free action regardless of storage; used to cross-check the dense form.
  void apply_matrix_free(const Vector& x, Vector& y) const;

 private:
  ChainSpec spec_;
  Eigen::Index dim_ = 0;
  Vector diagonal_;
  std::vector<Eigen::Index> strides_;
  std::optional<Matrix> dense_;
};

/// Throws ResourceError if bare_dim^n_sites exceeds kFullSpaceCap.
FullHamiltonian build_full_hamiltonian(const ChainSpec& spec);

/// Dense matrix assembled from kron products of the local terms.
Matrix assemble_dense_hamiltonian(const ChainSpec& spec);

struct EdResult {
  std::vector<double> energies;
  std::vector<FullState> states;
  EigResult raw;
};

EdResult ed_lowest(const ChainSpec& spec, int k, const LanczosOptions& opts = {});

}  // namespace oscdmrg
