#pragma once

// Single-free-site DMRG for the oscillator chain with optimized local bases.
//
// The superblock is L - site - R. Blocks keep at most n renormalized states;
// the free site is represented in an n-dimensional subspace of its m bare
// Fock states. In optimized mode that subspace is refined at every sweep
// position by feeding groups of n1 further bare states into the superblock
// and keeping the n dominant eigenvectors of the site density matrix.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oscdmrg/chain.hpp"
#include "oscdmrg/eigensolver.hpp"
#include "oscdmrg/entanglement.hpp"
#include "oscdmrg/exact.hpp"
#include "oscdmrg/fock.hpp"

namespace oscdmrg {

enum class BasisMode { bare, optimized };
enum class Side { left, right };

const char* to_string(BasisMode mode);
BasisMode parse_basis_mode(const std::string& text);

struct DmrgConfig {
  int kept_states = 10;                 // n: block and site basis size
  int feed_size = 2;                    // n1: bare states fed per refinement step
  int n_targets = 1;                    // lowest superblock states mixed into density matrices
  std::vector<double> target_weights;   // empty: 1 / n_targets each
  int n_sweeps = 6;
  double eig_tol = 1e-10;
  int eig_max_iter = 2000;
  double basis_tol = 1e-9;              // energy change per refinement cycle
  int max_basis_cycles = 4;
  double energy_tol = 1e-8;             // energy change between sweeps
  BasisMode basis_mode = BasisMode::optimized;
  std::uint64_t seed = 12345;
  bool reconstruct_states = false;      // expand final targets into the full space

  void validate(const ChainSpec& spec) const;
  std::vector<double> weights() const;
};

struct BlockHistory;

/// Renormalized block. `edge_x` is (a^+ + a) of the block site that touches
/// the free site, expressed in the block basis.
struct Block {
  int length = 0;
  Side side = Side::left;
  Matrix hamiltonian;
  Matrix edge_x;
  std::shared_ptr<const BlockHistory> history;

  int basis_dim() const { return static_cast<int>(hamiltonian.rows()); }

  /// Zero sites, one state, zero operators.
  static Block empty(Side side);

  /// The same block reflected to the other end of the chain.
  Block mirrored() const;
};

/// Basis vectors of `block` in its bare product space, sites in increasing
/// chain order: a bare_dim^length x basis_dim matrix.
Matrix expand_block(const Block& block, int bare_dim);

struct TruncationRecord {
  enum class Kind { block, site };
  Kind kind = Kind::block;
  int position = 0;               // site absorbed into a block, or the optimized site
  int sweep = -1;                 // -1 during warmup
  Side side = Side::left;         // block records: which block grew
  std::vector<double> lambdas;    // density-matrix eigenvalues, descending
  int kept = 0;
  double discarded_weight = 0.0;  // 1 - sum of kept lambdas
  bool degenerate_at_cut = false; // lambdas[kept-1] and lambdas[kept] tie within 1e-12
};

/// Free-site operators in the site basis.
struct SiteOperators {
  Matrix onsite;
  Matrix x;
};

SiteOperators site_operators(const SiteBasis& basis, double hbar);

/// Matrix-free L - site - R Hamiltonian acting on wavefunctions psi(l, s, r)
/// stored at index (l * site_dim + s) * right_dim + r.
class SuperblockOperator {
 public:
  SuperblockOperator(const Block& left, const SiteOperators& site, const Block& right, double hbar);

  Eigen::Index dim() const { return Eigen::Index{a_} * d_ * b_; }
  int left_dim() const { return a_; }
  int site_dim() const { return d_; }
  int right_dim() const { return b_; }

  void apply(const Vector& x, Vector& y) const;

 private:
  const Block& left_;
  const SiteOperators& site_;
  const Block& right_;
  double bond_;
  int a_, d_, b_;
};

struct SuperblockSolution {
  EigResult eig;
  int left_dim = 0;
  int site_dim = 0;
  int right_dim = 0;
};

/// Lowest config.n_targets eigenpairs of the superblock. `start`, when
/// given, seeds the eigensolver.
SuperblockSolution superblock_solve(const Block& left, const SiteOperators& site, const Block& right,
                                    double hbar, const DmrgConfig& config, const Vector& start = {});

/// Target-weighted density matrix of the free site (site_dim^2).
Matrix site_density(const SuperblockSolution& sol, std::span<const double> weights);

/// Target-weighted density matrix of the free site joined with the block on
/// `side`; indices follow enlarge_block for that side.
Matrix enlarged_block_density(const SuperblockSolution& sol, std::span<const double> weights, Side side);

/// Absorbs one site into the block. Left blocks index the result as
/// block * site_dim + site, right blocks as site * block_dim + block.
Block enlarge_block(const Block& block, const SiteBasis& site, double hbar, Side side = Side::left);

/// Rotates the block onto the n dominant eigenvectors of rdm.
std::pair<Block, TruncationRecord> truncate_block(const Block& block, const DensityMatrix& rdm, int n);

struct SiteOptimization {
  SiteBasis basis;
  TruncationRecord record;
  SuperblockSolution solution;  // superblock solved in the returned basis
  int cycles = 0;
  int solves = 0;
};

/// Refines the free-site basis between fixed blocks. Each step augments the
/// current basis with the next n1 bare states (orthogonalized, cycling through
/// all m), solves the superblock and keeps the n dominant site density-matrix
/// eigenvectors. Stops when the ground energy moves by less than basis_tol
/// over a full cycle or after max_basis_cycles. A refined basis whose energy
/// is above that of `current` is rejected.
SiteOptimization optimize_site_basis(const DmrgConfig& config, const Block& left, const Block& right,
                                     const SiteBasis& current, double hbar);

struct DmrgResult {
  std::vector<double> energies;            // n_targets lowest, ascending
  double gap = 0.0;                        // energies[1] - energies[0]; NaN with one target
  double entanglement_se = 0.0;            // mean single-site entropy, nats
  std::vector<double> site_entropies;      // ground state, one per site
  std::vector<TruncationRecord> truncation_records;
  std::vector<double> sweep_energy_trace;  // ground energy at the end of each sweep
  bool converged = false;
  int center = 0;                          // left-block length at the sweep turning point
  int superblock_solves = 0;
  std::vector<SiteBasis> site_bases;
  std::vector<FullState> states;           // filled when reconstruct_states is set
};

/// Warmup with a mirrored environment, then finite sweeps until the ground
/// energy changes by less than energy_tol between sweeps (converged = true)
/// or n_sweeps are done. Requires n_sites >= 3.
DmrgResult run_dmrg(const ChainSpec& spec, const DmrgConfig& config);

/// Block truncation at the chain center in the last sweep: the spectrum of
/// the density matrix of sites 0..center.
const TruncationRecord& center_block_record(const DmrgResult& result);

}  // namespace oscdmrg
