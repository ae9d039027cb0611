#include "oscdmrg/exact.hpp"

#include <cmath>
#include <string>

#include "oscdmrg/errors.hpp"
#include "oscdmrg/fock.hpp"

namespace oscdmrg {

namespace {

Eigen::Index full_dim(const ChainSpec& spec) {
  Eigen::Index dim = 1;
  for (int i = 0; i < spec.n_sites; ++i) {
    dim *= spec.bare_dim;
    if (dim > kFullSpaceCap) {
      throw ResourceError("full space " + std::to_string(spec.bare_dim) + "^" +
                          std::to_string(spec.n_sites) + " exceeds cap of " +
                          std::to_string(kFullSpaceCap) + " states");
    }
  }
  return dim;
}

}  // namespace

void FullState::validate() const {
  Eigen::Index expected = 1;
  for (int i = 0; i < n_sites; ++i) expected *= site_dim;
  if (amplitudes.size() != expected) throw ArgumentError("FullState: amplitude count mismatch");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw ArgumentError("FullState: not normalized");
}

Matrix assemble_dense_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const Eigen::Index dim = full_dim(spec);
  const int m = spec.bare_dim;
  const Matrix onsite = onsite_term(m, spec.hbar);
  const Matrix x = displacement_op(m);
  const Matrix bond = bond_coefficient(spec.hbar) * kron(x, x);

  // Places `op` (one or more sites wide, starting at `site`) between identities.
  auto embed = [&](int site, const Matrix& op) {
    Eigen::Index left = 1;
    for (int j = 0; j < site; ++j) left *= m;
    const Eigen::Index right = dim / (left * op.rows());
    return kron(Matrix::Identity(left, left), kron(op, Matrix::Identity(right, right)));
  };

  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < spec.n_sites; ++i) h += embed(i, onsite);
  for (int i = 0; i + 1 < spec.n_sites; ++i) h += embed(i, bond);
  return h;
}

FullHamiltonian::FullHamiltonian(const ChainSpec& spec) : spec_(spec) {
  spec_.validate();
  dim_ = full_dim(spec_);
  const int n = spec_.n_sites;
  const int m = spec_.bare_dim;

  strides_.assign(n, 1);
  for (int i = n - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * m;

  const Vector onsite = onsite_term(m, spec_.hbar).diagonal();
  diagonal_ = Vector::Zero(dim_);
  for (Eigen::Index idx = 0; idx < dim_; ++idx) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) e += onsite[(idx / strides_[i]) % m];
    diagonal_[idx] = e;
  }

  if (dim_ <= kDenseFullSpaceCap) dense_ = assemble_dense_hamiltonian(spec_);
}

void FullHamiltonian::apply(const Vector& x, Vector& y) const {
  if (dense_) {
    y.noalias() = *dense_ * x;
  } else {
    apply_matrix_free(x, y);
  }
}

void FullHamiltonian::apply_matrix_free(const Vector& x, Vector& y) const {
  const int n = spec_.n_sites;
  const int m = spec_.bare_dim;
  const double c = bond_coefficient(spec_.hbar);
  y = diagonal_.cwiseProduct(x);

  // <s'|a^+ + a|s> is sqrt(max(s, s')) for |s - s'| = 1.
  for (int bond = 0; bond + 1 < n; ++bond) {
    const Eigen::Index sa = strides_[bond];
    const Eigen::Index sb = strides_[bond + 1];
    for (Eigen::Index idx = 0; idx < dim_; ++idx) {
      const int qa = static_cast<int>((idx / sa) % m);
      const int qb = static_cast<int>((idx / sb) % m);
      double acc = 0.0;
      for (int da : {-1, 1}) {
        const int pa = qa + da;
        if (pa < 0 || pa >= m) continue;
        const double xa = std::sqrt(static_cast<double>(std::max(pa, qa)));
        for (int db : {-1, 1}) {
          const int pb = qb + db;
          if (pb < 0 || pb >= m) continue;
          const double xb = std::sqrt(static_cast<double>(std::max(pb, qb)));
          acc += xa * xb * x[idx + da * sa + db * sb];
        }
      }
      y[idx] += c * acc;
    }
  }
}

FullHamiltonian build_full_hamiltonian(const ChainSpec& spec) { return FullHamiltonian(spec); }

EdResult ed_lowest(const ChainSpec& spec, int k, const LanczosOptions& opts) {
  const FullHamiltonian h(spec);
  EdResult out;
  out.raw = lowest_k([&h](const Vector& x, Vector& y) { h.apply(x, y); }, h.dim(), k, opts);
  out.energies = out.raw.values;
  for (const auto& v : out.raw.vectors) {
    out.states.push_back(FullState{spec.n_sites, spec.bare_dim, v});
  }
  return out;
}

}  // namespace oscdmrg
