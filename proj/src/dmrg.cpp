#include "oscdmrg/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oscdmrg/errors.hpp"

namespace oscdmrg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BlockHistory {
  enum class Kind { enlarge, rotate, mirror };
  Kind kind = Kind::enlarge;
  Side side = Side::left;
  int length = 0;
  Matrix matrix;  // site basis (enlarge) or block rotation (rotate)
  std::shared_ptr<const BlockHistory> parent;
};

const char* to_string(BasisMode mode) { return mode == BasisMode::bare ? "bare" : "optimized"; }

BasisMode parse_basis_mode(const std::string& text) {
  if (text == "bare") return BasisMode::bare;
  if (text == "optimized") return BasisMode::optimized;
  throw ArgumentError("basis mode must be 'bare' or 'optimized', got '" + text + "'");
}

void DmrgConfig::validate(const ChainSpec& spec) const {
  spec.validate();
  if (kept_states < 1 || kept_states > spec.bare_dim) {
    throw ArgumentError("kept_states must lie in 1..bare_dim (" + std::to_string(spec.bare_dim) + ")");
  }
  if (basis_mode == BasisMode::optimized && feed_size < 1) throw ArgumentError("feed_size must be >= 1");
  if (n_targets < 1) throw ArgumentError("n_targets must be >= 1");
  if (!target_weights.empty()) {
    if (static_cast<int>(target_weights.size()) != n_targets) {
      throw ArgumentError("target_weights must have n_targets entries");
    }
    double sum = 0.0;
    for (double w : target_weights) {
      if (!(w > 0.0)) throw ArgumentError("target weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("target weights must sum to 1");
  }
  if (n_sweeps < 1) throw ArgumentError("n_sweeps must be >= 1");
  if (!(eig_tol > 0.0) || !(energy_tol > 0.0) || !(basis_tol > 0.0)) {
    throw ArgumentError("tolerances must be positive");
  }
  if (eig_max_iter < 1 || max_basis_cycles < 1) throw ArgumentError("iteration limits must be >= 1");
}

std::vector<double> DmrgConfig::weights() const {
  if (!target_weights.empty()) return target_weights;
  return std::vector<double>(n_targets, 1.0 / n_targets);
}

Block Block::empty(Side side) {
  Block b;
  b.side = side;
  b.hamiltonian = Matrix::Zero(1, 1);
  b.edge_x = Matrix::Zero(1, 1);
  return b;
}

Block Block::mirrored() const {
  Block b = *this;
  b.side = side == Side::left ? Side::right : Side::left;
  auto node = std::make_shared<BlockHistory>();
  node->kind = BlockHistory::Kind::mirror;
  node->side = b.side;
  node->length = length;
  node->parent = history;
  b.history = std::move(node);
  return b;
}

namespace {

Matrix expand_history(const BlockHistory* node, int bare_dim) {
  if (node == nullptr) return Matrix::Identity(1, 1);
  Matrix below = expand_history(node->parent.get(), bare_dim);
  switch (node->kind) {
    case BlockHistory::Kind::enlarge:
      return node->side == Side::left ? kron(below, node->matrix) : kron(node->matrix, below);
    case BlockHistory::Kind::rotate:
      return below * node->matrix;
    case BlockHistory::Kind::mirror: {
      Matrix out(below.rows(), below.cols());
      for (Eigen::Index row = 0; row < below.rows(); ++row) {
        Eigen::Index rest = row;
        Eigen::Index reversed = 0;
        for (int i = 0; i < node->length; ++i) {
          reversed = reversed * bare_dim + rest % bare_dim;
          rest /= bare_dim;
        }
        out.row(reversed) = below.row(row);
      }
      return out;
    }
  }
  return below;
}

// Eigenpairs of a symmetric matrix ordered by descending eigenvalue, ties
// broken by the solver's index.
std::pair<std::vector<double>, Matrix> descending_eig(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.transpose()));
  const Eigen::Index dim = rho.rows();
  std::vector<Eigen::Index> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return solver.eigenvalues()[i] > solver.eigenvalues()[j];
  });
  std::vector<double> lambdas(dim);
  Matrix vectors(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    lambdas[c] = solver.eigenvalues()[order[c]];
    vectors.col(c) = solver.eigenvectors().col(order[c]);
  }
  return {std::move(lambdas), std::move(vectors)};
}

TruncationRecord make_record(TruncationRecord::Kind kind, std::vector<double> lambdas, int kept) {
  TruncationRecord rec;
  rec.kind = kind;
  rec.kept = kept;
  double kept_sum = 0.0;
  for (int i = 0; i < kept; ++i) kept_sum += lambdas[i];
  rec.discarded_weight = 1.0 - kept_sum;
  if (kept < static_cast<int>(lambdas.size())) {
    rec.degenerate_at_cut = lambdas[kept - 1] > 1e-12 && std::abs(lambdas[kept - 1] - lambdas[kept]) <= 1e-12;
  }
  rec.lambdas = std::move(lambdas);
  return rec;
}

std::vector<double> leading_weights(std::span<const double> weights, std::size_t available) {
  const std::size_t count = std::min(weights.size(), available);
  std::vector<double> out(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(count));
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& w : out) w /= sum;
  return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Matrix expand_block(const Block& block, int bare_dim) { return expand_history(block.history.get(), bare_dim); }

SiteOperators site_operators(const SiteBasis& basis, double hbar) {
  const int m = basis.bare_dim();
  return {project(onsite_term(m, hbar), basis), project(displacement_op(m), basis)};
}

SuperblockOperator::SuperblockOperator(const Block& left, const SiteOperators& site, const Block& right,
                                       double hbar)
    : left_(left),
      site_(site),
      right_(right),
      bond_(bond_coefficient(hbar)),
      a_(left.basis_dim()),
      d_(static_cast<int>(site.onsite.rows())),
      b_(right.basis_dim()) {
  if (site.x.rows() != d_ || left.edge_x.rows() != a_ || right.edge_x.rows() != b_) {
    throw ArgumentError("superblock: inconsistent operator dimensions");
  }
}

void SuperblockOperator::apply(const Vector& x, Vector& y) const {
  const Eigen::Index a = a_, d = d_, b = b_;
  y.setZero(dim());
  Eigen::Map<const RowMatrix> x_left(x.data(), a, d * b);
  Eigen::Map<const RowMatrix> x_right(x.data(), a * d, b);
  Eigen::Map<RowMatrix> y_left(y.data(), a, d * b);
  Eigen::Map<RowMatrix> y_right(y.data(), a * d, b);

  y_left.noalias() += left_.hamiltonian * x_left;
  y_right.noalias() += x_right * right_.hamiltonian.transpose();

  // x_site and edge_x(R) applied to psi, then x_site and edge_x(L) applied
  // in the other order.
  const RowMatrix right_edge = x_right * right_.edge_x.transpose();
  RowMatrix site_x(a, d * b);
  for (Eigen::Index l = 0; l < a; ++l) {
    Eigen::Map<const RowMatrix> slice(x.data() + l * d * b, d, b);
    Eigen::Map<const RowMatrix> edge_slice(right_edge.data() + l * d * b, d, b);
    Eigen::Map<RowMatrix> out(y.data() + l * d * b, d, b);
    out.noalias() += site_.onsite * slice;
    out.noalias() += bond_ * site_.x * edge_slice;
    Eigen::Map<RowMatrix>(site_x.data() + l * d * b, d, b).noalias() = site_.x * slice;
  }
  y_left.noalias() += bond_ * left_.edge_x * site_x;
}

SuperblockSolution superblock_solve(const Block& left, const SiteOperators& site, const Block& right,
                                    double hbar, const DmrgConfig& config, const Vector& start) {
  const SuperblockOperator op(left, site, right, hbar);
  LanczosOptions opts;
  if (start.size() == op.dim()) opts.start = start;
  opts.tol = config.eig_tol;
  opts.max_iter = config.eig_max_iter;
  opts.seed = config.seed;
  const int k = static_cast<int>(std::min<Eigen::Index>(config.n_targets, op.dim()));
  SuperblockSolution sol;
  sol.eig = lowest_k([&op](const Vector& x, Vector& y) { op.apply(x, y); }, op.dim(), k, opts);
  sol.left_dim = op.left_dim();
  sol.site_dim = op.site_dim();
  sol.right_dim = op.right_dim();
  return sol;
}

Matrix site_density(const SuperblockSolution& sol, std::span<const double> weights) {
  const Eigen::Index a = sol.left_dim, d = sol.site_dim, b = sol.right_dim;
  const auto w = leading_weights(weights, sol.eig.vectors.size());
  Matrix rho = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Vector& psi = sol.eig.vectors[k];
    for (Eigen::Index l = 0; l < a; ++l) {
      Eigen::Map<const RowMatrix> slice(psi.data() + l * d * b, d, b);
      rho.noalias() += w[k] * slice * slice.transpose();
    }
  }
  return symmetrized(rho);
}

Matrix enlarged_block_density(const SuperblockSolution& sol, std::span<const double> weights, Side side) {
  const Eigen::Index a = sol.left_dim, d = sol.site_dim, b = sol.right_dim;
  const auto w = leading_weights(weights, sol.eig.vectors.size());
  const Eigen::Index dim = side == Side::left ? a * d : d * b;
  Matrix rho = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Vector& psi = sol.eig.vectors[k];
    if (side == Side::left) {
      Eigen::Map<const RowMatrix> phi(psi.data(), a * d, b);
      rho.noalias() += w[k] * phi * phi.transpose();
    } else {
      Eigen::Map<const RowMatrix> phi(psi.data(), a, d * b);
      rho.noalias() += w[k] * phi.transpose() * phi;
    }
  }
  return symmetrized(rho);
}

Block enlarge_block(const Block& block, const SiteBasis& site, double hbar, Side side) {
  const SiteOperators ops = site_operators(site, hbar);
  const double c = bond_coefficient(hbar);
  const Matrix eye_block = Matrix::Identity(block.basis_dim(), block.basis_dim());
  const Matrix eye_site = Matrix::Identity(site.kept_dim(), site.kept_dim());

  Block out;
  out.length = block.length + 1;
  out.side = side;
  if (side == Side::left) {
    out.hamiltonian = kron(block.hamiltonian, eye_site) + kron(eye_block, ops.onsite) +
                      c * kron(block.edge_x, ops.x);
    out.edge_x = kron(eye_block, ops.x);
  } else {
    out.hamiltonian = kron(eye_site, block.hamiltonian) + kron(ops.onsite, eye_block) +
                      c * kron(ops.x, block.edge_x);
    out.edge_x = kron(ops.x, eye_block);
  }
  auto node = std::make_shared<BlockHistory>();
  node->kind = BlockHistory::Kind::enlarge;
  node->side = side;
  node->length = out.length;
  node->matrix = site.transform();
  node->parent = block.history;
  out.history = std::move(node);
  return out;
}

std::pair<Block, TruncationRecord> truncate_block(const Block& block, const DensityMatrix& rdm, int n) {
  const int dim = block.basis_dim();
  if (rdm.dim() != dim) {
    throw ArgumentError("truncate_block: density matrix dim " + std::to_string(rdm.dim()) +
                        " != block dim " + std::to_string(dim));
  }
  if (n < 1 || n > dim) {
    throw ArgumentError("truncate_block: cannot keep " + std::to_string(n) + " of " + std::to_string(dim) + " states");
  }
  auto [lambdas, vectors] = descending_eig(rdm.entries());
  const Matrix keep = vectors.leftCols(n);

  Block out;
  out.length = block.length;
  out.side = block.side;
  out.hamiltonian = symmetrized(keep.transpose() * block.hamiltonian * keep);
  out.edge_x = symmetrized(keep.transpose() * block.edge_x * keep);
  auto node = std::make_shared<BlockHistory>();
  node->kind = BlockHistory::Kind::rotate;
  node->side = block.side;
  node->length = block.length;
  node->matrix = keep;
  node->parent = block.history;
  out.history = std::move(node);

  TruncationRecord rec = make_record(TruncationRecord::Kind::block, std::move(lambdas), n);
  rec.side = block.side;
  rec.position = block.length - 1;
  return {std::move(out), std::move(rec)};
}

namespace {

// Appends the bare states first, first+1, ... (count of them, modulo m),
// orthogonalized against the columns already present; near-null
// remainders are dropped.
Matrix augment(const Matrix& basis, int first, int count) {
  const Eigen::Index m = basis.rows();
  Matrix out(m, basis.cols() + count);
  out.leftCols(basis.cols()) = basis;
  Eigen::Index cols = basis.cols();
  for (int t = 0; t < count; ++t) {
    Vector v = Vector::Unit(m, (first + t) % m);
    for (int pass = 0; pass < 2; ++pass) v -= out.leftCols(cols) * (out.leftCols(cols).transpose() * v);
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    out.col(cols++) = v / norm;
  }
  return out.leftCols(cols);
}

Matrix orthonormalized(const Matrix& columns) {
  Eigen::HouseholderQR<Matrix> qr(columns);
  Matrix q = qr.householderQ() * Matrix::Identity(columns.rows(), columns.cols());
  // Fix signs so that the rotation relative to the input is close to identity.
  const Matrix r = qr.matrixQR().topRows(columns.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  return q;
}

}  // namespace

SiteOptimization optimize_site_basis(const DmrgConfig& config, const Block& left, const Block& right,
                                     const SiteBasis& current, double hbar) {
  const int m = current.bare_dim();
  const int n = current.kept_dim();
  const Matrix bare_onsite = onsite_term(m, hbar);
  const Matrix bare_x = displacement_op(m);
  const auto weights = config.weights();

  int solves = 0;
  Matrix previous_cols;
  SuperblockSolution previous;
  // Sum of the previous targets carried over to the new site basis.
  auto carried_start = [&](const Matrix& cols) {
    if (previous_cols.size() == 0) return Vector();
    const Matrix overlap = cols.transpose() * previous_cols;
    const int a = previous.left_dim, d_old = previous.site_dim, b = previous.right_dim;
    const int d_new = static_cast<int>(cols.cols());
    Vector out = Vector::Zero(Eigen::Index{a} * d_new * b);
    for (const Vector& psi : previous.eig.vectors) {
      for (int l = 0; l < a; ++l) {
        Eigen::Map<RowMatrix>(out.data() + Eigen::Index{l} * d_new * b, d_new, b).noalias() +=
            overlap * Eigen::Map<const RowMatrix>(psi.data() + Eigen::Index{l} * d_old * b, d_old, b);
      }
    }
    return out;
  };
  auto solve_in = [&](const Matrix& cols) {
    ++solves;
    const SiteOperators ops{symmetrized(cols.transpose() * bare_onsite * cols),
                            symmetrized(cols.transpose() * bare_x * cols)};
    SuperblockSolution sol = superblock_solve(left, ops, right, hbar, config, carried_start(cols));
    previous_cols = cols;
    previous = sol;
    return sol;
  };
  auto site_record = [&](const SuperblockSolution& sol) {
    auto eig = descending_eig(site_density(sol, weights));
    return std::pair{make_record(TruncationRecord::Kind::site, std::move(eig.first), n), std::move(eig.second)};
  };

  SuperblockSolution start = solve_in(current.transform());
  const double start_energy = start.eig.values.front();

  if (n == m) {
    auto [rec, vecs] = site_record(start);
    return {current, std::move(rec), std::move(start), 0, solves};
  }

  Matrix basis = current.transform();
  TruncationRecord record = site_record(start).first;
  const int feed = std::max(1, config.feed_size);
  const int groups = (m + feed - 1) / feed;
  int cursor = 0;
  int cycles = 0;
  double cycle_energy = start_energy;

  for (; cycles < config.max_basis_cycles;) {
    double last_energy = cycle_energy;
    for (int g = 0; g < groups; ++g) {
      const Matrix augmented = augment(basis, cursor, feed);
      cursor = (cursor + feed) % m;
      if (augmented.cols() == n) continue;
      const SuperblockSolution sol = solve_in(augmented);
      auto [rec, vecs] = site_record(sol);
      basis = orthonormalized(augmented * vecs.leftCols(n));
      record = std::move(rec);
      last_energy = sol.eig.values.front();
    }
    ++cycles;
    const bool settled = std::abs(last_energy - cycle_energy) < config.basis_tol;
    cycle_energy = last_energy;
    if (settled) break;
  }

  SuperblockSolution refined = solve_in(basis);
  const double slack = 1e-12 * std::max(1.0, std::abs(start_energy));
  if (refined.eig.values.front() > start_energy + slack) {
    return {current, std::move(record), std::move(start), cycles, solves};
  }
  return {SiteBasis(basis), std::move(record), std::move(refined), cycles, solves};
}

namespace {

FullState reconstruct(const Block& left, const SiteBasis& site, const Block& right, const Vector& psi,
                      const ChainSpec& spec) {
  Eigen::Index full = 1;
  for (int i = 0; i < spec.n_sites; ++i) {
    full *= spec.bare_dim;
    if (full > kFullSpaceCap) throw ResourceError("state reconstruction exceeds the full-space cap");
  }
  const Matrix left_sites = kron(expand_block(left, spec.bare_dim), site.transform());
  const Matrix right_sites = expand_block(right, spec.bare_dim);
  Eigen::Map<const RowMatrix> coeffs(psi.data(), left_sites.cols(), right_sites.cols());
  const RowMatrix amplitudes = left_sites * coeffs * right_sites.transpose();
  FullState state{spec.n_sites, spec.bare_dim, Eigen::Map<const Vector>(amplitudes.data(), amplitudes.size())};
  state.amplitudes.normalize();
  return state;
}

}  // namespace

DmrgResult run_dmrg(const ChainSpec& spec, const DmrgConfig& config) {
  config.validate(spec);
  const int n_sites = spec.n_sites;
  if (n_sites < 3) throw ArgumentError("run_dmrg needs at least 3 sites; use ed_lowest for smaller chains");
  const int n = config.kept_states;
  const double hbar = spec.hbar;
  const auto weights = config.weights();
  const std::vector<double> ground_only{1.0};

  DmrgResult result;
  std::vector<SiteBasis> bases(n_sites, SiteBasis::bare(spec.bare_dim, n));
  std::vector<Block> left(n_sites), right(n_sites);  // index = block length
  left[0] = Block::empty(Side::left);
  right[0] = Block::empty(Side::right);
  result.site_entropies.assign(n_sites, std::numeric_limits<double>::quiet_NaN());
  int sweep = -1;

  auto visit = [&](int p, const Block& lb, const Block& rb) {
    SuperblockSolution sol;
    if (config.basis_mode == BasisMode::optimized) {
      SiteOptimization opt = optimize_site_basis(config, lb, rb, bases[p], hbar);
      bases[p] = opt.basis;
      opt.record.position = p;
      opt.record.sweep = sweep;
      result.truncation_records.push_back(std::move(opt.record));
      result.superblock_solves += opt.solves;
      sol = std::move(opt.solution);
    } else {
      const SiteOperators ops = site_operators(bases[p], hbar);
      sol = superblock_solve(lb, ops, rb, hbar, config);
      ++result.superblock_solves;
    }
    const auto lambdas = density_spectrum(DensityMatrix(site_density(sol, ground_only)));
    result.site_entropies[p] = spectrum_entropy(lambdas);
    return sol;
  };

  auto grow = [&](int p, const SuperblockSolution& sol, Side side) {
    const Block& source = side == Side::left ? left[p] : right[n_sites - 1 - p];
    const Block enlarged = enlarge_block(source, bases[p], hbar, side);
    const DensityMatrix rho(enlarged_block_density(sol, weights, side));
    auto [block, rec] = truncate_block(enlarged, rho, std::min(n, enlarged.basis_dim()));
    rec.position = p;
    rec.sweep = sweep;
    result.truncation_records.push_back(std::move(rec));
    if (side == Side::left) {
      left[p + 1] = std::move(block);
    } else {
      right[n_sites - p] = std::move(block);
    }
  };

  // Warmup: L(l) - site - mirror(L(l)) until the superblock spans the chain.
  int center = 0;
  std::optional<SuperblockSolution> pending;
  double previous_energy = std::numeric_limits<double>::quiet_NaN();
  for (int l = 0;; ++l) {
    SuperblockSolution sol = visit(l, left[l], right[l]);
    bases[n_sites - 1 - l] = bases[l];
    if (2 * l + 1 == n_sites) {
      center = l;
      previous_energy = sol.eig.values.front();
      pending = std::move(sol);
      break;
    }
    grow(l, sol, Side::left);
    right[l + 1] = left[l + 1].mirrored();
    if (2 * l + 2 == n_sites) {
      center = l + 1;
      break;
    }
  }
  result.center = center;

  SuperblockSolution closing;
  for (sweep = 0; sweep < config.n_sweeps; ++sweep) {
    SuperblockSolution sol = pending ? std::move(*pending) : visit(center, left[center], right[n_sites - 1 - center]);
    pending.reset();
    grow(center, sol, Side::left);
    for (int p = center + 1; p < n_sites - 1; ++p) grow(p, visit(p, left[p], right[n_sites - 1 - p]), Side::left);
    grow(n_sites - 1, visit(n_sites - 1, left[n_sites - 1], right[0]), Side::right);
    for (int p = n_sites - 2; p > 0; --p) grow(p, visit(p, left[p], right[n_sites - 1 - p]), Side::right);
    grow(0, visit(0, left[0], right[n_sites - 1]), Side::left);
    for (int p = 1; p < center; ++p) grow(p, visit(p, left[p], right[n_sites - 1 - p]), Side::left);

    closing = visit(center, left[center], right[n_sites - 1 - center]);
    const double energy = closing.eig.values.front();
    result.sweep_energy_trace.push_back(energy);
    const bool settled = std::isfinite(previous_energy) && std::abs(energy - previous_energy) < config.energy_tol;
    previous_energy = energy;
    if (settled) {
      result.converged = true;
      break;
    }
    pending = closing;
  }

  result.energies = closing.eig.values;
  result.gap = result.energies.size() >= 2 ? result.energies[1] - result.energies[0]
                                           : std::numeric_limits<double>::quiet_NaN();
  result.entanglement_se =
      std::accumulate(result.site_entropies.begin(), result.site_entropies.end(), 0.0) / n_sites;
  if (config.reconstruct_states) {
    for (const Vector& psi : closing.eig.vectors) {
      result.states.push_back(reconstruct(left[center], bases[center], right[n_sites - 1 - center], psi, spec));
    }
  }
  result.site_bases = std::move(bases);
  return result;
}

const TruncationRecord& center_block_record(const DmrgResult& result) {
  for (auto it = result.truncation_records.rbegin(); it != result.truncation_records.rend(); ++it) {
    if (it->kind == TruncationRecord::Kind::block && it->side == Side::left && it->position == result.center) {
      return *it;
    }
  }
  throw ArgumentError("no center block truncation recorded");
}

}  // namespace oscdmrg
