#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cqnls/radial.hpp"

namespace cqnls {

inline constexpr double kOmegaMax = 3.0 / 16.0;

struct ShootingOptions {
  double r_seed = 1e-4;
  double ode_tolerance = 1e-13;
  int max_bisections = 200;
  /// Warm start: search near this P(0) first.
  std::optional<double> p0_guess;
};

/// Ground state P_omega sampled on a grid, with enough data to evaluate it
/// anywhere (Hermite interpolation inside, exact linear tail outside).
struct SolitonProfile {
  double omega = 0.0;
  RadialField field;
  std::vector<double> derivative;  // P'(r_i) from the ODE
  double p0 = 0.0;
  FunctionalReport report;
  NormIntegrals norms;
  double beta = 0.0;
  double match_radius = 0.0;    // beyond this P = A exp(-sqrt(omega) r) / r
  double tail_amplitude = 0.0;  // A

  double value_at(double r) const;
  double derivative_at(double r) const;
};

SolitonProfile solve_ground_state(double omega, const RadialGrid& grid, const ShootingOptions& opts = {});

/// Builds a profile record (norms, beta) from an arbitrary real field; used
/// to test the identities off the solution manifold.
SolitonProfile profile_from_field(double omega, const RadialField& field);

struct PohozaevReport {
  double mass = 0.0;    // ||P||_2^2 = (beta+1)/(3 omega) G
  double l4 = 0.0;      // ||P||_4^4 = 4(beta+1)/3 G
  double l6 = 0.0;      // ||P||_6^6 = beta G
  double energy = 0.0;  // E = (1-beta)/6 G
  double max() const;
  std::array<double, 4> as_array() const { return {mass, l4, l6, energy}; }
};

PohozaevReport pohozaev_report(const SolitonProfile& p);

/// c P(b r) with c = sqrt((1+beta)/(4 beta)), b = 3(1+beta)/(4 sqrt(3 beta)).
RadialField rescaled_soliton(const SolitonProfile& p);
std::array<double, 2> rescaling_constants(double beta);

struct FamilyRow {
  double omega = 0.0;
  double mass_P = 0.0;
  double energy_P = 0.0;
  double beta = 0.0;
  double grad_sq_P = 0.0;  // ||grad P||^2
  double p0 = 0.0;
  double mass_R = 0.0;
  double energy_R = 0.0;
};

struct FamilyTable {
  RadialGrid grid;
  std::vector<FamilyRow> rows;
};

FamilyTable sweep_family(const std::vector<double>& omegas, const RadialGrid& grid, const ShootingOptions& opts = {});

FamilyRow family_row(const SolitonProfile& p);

/// Log-spaced frequencies accumulating at both ends of (0, 3/16).
std::vector<double> default_omega_grid(std::size_t count = 60, double lo = 0.02, double hi = 0.18);

std::string family_csv(const FamilyTable& table);

}  // namespace cqnls
