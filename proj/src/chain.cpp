#include "oscdmrg/chain.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "oscdmrg/errors.hpp"

namespace oscdmrg {

void ChainSpec::validate() const {
  if (n_sites < 1) throw ArgumentError("n_sites must be >= 1, got " + std::to_string(n_sites));
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ArgumentError("hbar must be positive and finite");
  if (bare_dim < 2) throw ArgumentError("bare_dim must be >= 2, got " + std::to_string(bare_dim));
}

double dispersion(const ChainSpec& spec, int j) {
  spec.validate();
  if (j < 1 || j > spec.n_sites) {
    throw ArgumentError("mode index " + std::to_string(j) + " outside 1.." + std::to_string(spec.n_sites));
  }
  return 2.0 * std::sin(j * std::numbers::pi / (2.0 * (spec.n_sites + 1)));
}

ModeSpectrum mode_spectrum(const ChainSpec& spec) {
  ModeSpectrum out;
  for (int j = 1; j <= spec.n_sites; ++j) {
    out.mode_numbers.push_back(j);
    out.frequencies.push_back(dispersion(spec, j));
  }
  return out;
}

double ground_energy_closed(const ChainSpec& spec) {
  spec.validate();
  const double n = spec.n_sites;
  const double pi = std::numbers::pi;
  return std::numbers::sqrt2 / 2.0 * spec.hbar * std::sin(n * pi / (4.0 * (n + 1))) /
         std::sin(pi / (4.0 * (n + 1)));
}

double ground_energy_mode_sum(const ChainSpec& spec) {
  double sum = 0.0;
  for (int j = 1; j <= spec.n_sites; ++j) sum += spec.hbar * dispersion(spec, j);
  return 0.5 * sum;
}

double first_gap(const ChainSpec& spec) { return spec.hbar * dispersion(spec, 1); }

namespace {

struct Level {
  double energy;
  std::vector<int> occupation;
  int highest;  // largest mode index carrying a quantum
};

struct LevelAfter {
  bool operator()(const Level& a, const Level& b) const {
    if (a.energy != b.energy) return a.energy > b.energy;
    return a.occupation > b.occupation;
  }
};

}  // namespace

std::vector<double> spectrum(const ChainSpec& spec, int count) {
  spec.validate();
  if (count < 1) throw ArgumentError("spectrum count must be >= 1");
  const auto modes = mode_spectrum(spec);
  const int n = spec.n_sites;

  // Each occupation multiset is reached exactly once by only ever adding
  // quanta to modes at or above the current highest occupied mode.
  std::priority_queue<Level, std::vector<Level>, LevelAfter> frontier;
  for (int j = 0; j < n; ++j) {
    std::vector<int> occ(n, 0);
    occ[j] = 1;
    frontier.push({spec.hbar * modes.frequencies[j], std::move(occ), j});
  }

  std::vector<double> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Level top = frontier.top();
    frontier.pop();
    if (out.empty() || std::abs(top.energy - out.back()) > 1e-12) out.push_back(top.energy);
    for (int j = top.highest; j < n; ++j) {
      Level child{top.energy + spec.hbar * modes.frequencies[j], top.occupation, j};
      ++child.occupation[j];
      frontier.push(std::move(child));
    }
  }
  return out;
}

double relative_error(double x, double exact) { return std::abs(x - exact) / std::abs(exact); }

}  // namespace oscdmrg
