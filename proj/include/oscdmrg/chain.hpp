#pragma once

// Dimensionless harmonic oscillator chain with fixed ends and its
// closed-form normal-mode solution.

#include <vector>

namespace oscdmrg {

/// Model parameters. Lengths, masses and energies are already scaled by the
/// lattice constant, particle mass and spring energy, so only the reduced
/// Planck constant and the per-site Fock cutoff remain.
struct ChainSpec {
  int n_sites = 1;
  double hbar = 1.0;
  int bare_dim = 16;

  /// Throws ArgumentError unless n_sites >= 1, hbar > 0 and bare_dim >= 2.
  void validate() const;
};

struct ModeSpectrum {
  std::vector<int> mode_numbers;   // 1..N
  std::vector<double> frequencies;  // ascending, in (0, 2)
};

/// omega_j = 2 sin(j pi / (2 (N + 1))), 1 <= j <= N.
double dispersion(const ChainSpec& spec, int j);

ModeSpectrum mode_spectrum(const ChainSpec& spec);

/// Zero-point energy, evaluated through the closed-form geometric sum.
double ground_energy_closed(const ChainSpec& spec);

/// Half the sum of hbar * omega_j, summed mode by mode.
double ground_energy_mode_sum(const ChainSpec& spec);

/// One quantum of the softest mode: hbar * omega_1.
double first_gap(const ChainSpec& spec);

/// The `count` lowest excitation energies sum_j n_j hbar omega_j over
/// non-zero occupation vectors, ascending. Levels that coincide within 1e-12
/// are reported once.
std::vector<double> spectrum(const ChainSpec& spec, int count);

/// |x - exact| / |exact|.
double relative_error(double x, double exact);

}  // namespace oscdmrg
