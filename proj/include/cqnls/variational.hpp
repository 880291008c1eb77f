#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqnls/groundstate.hpp"
#include "cqnls/radial.hpp"

namespace cqnls {

/// ||f||_2 ||f||_{H1dot}^{3/(1+a)} ||f||_6^{3a/(1+a)} / ||f||_4^4.
double gn_quotient(const RadialField& f, double alpha);
double gn_quotient(const NormIntegrals& n, double alpha);

struct GNReport {
  double alpha = 0.0;
  double c_alpha = 0.0;
  double optimizer_omega = 0.0;
  double quotient_at_optimizer = 0.0;
  // Only for alpha = 1: ||Q_1||_2 = (8/3) / C_1 and m2 = ||Q_1||_2^2.
  std::optional<double> q1_l2;
  std::optional<double> m2;
};

/// Frequency with beta(omega) = target, bracketed by the family table and
/// refined by re-solving on the table's grid.
double omega_for_beta(double target, const FamilyTable& family, const ShootingOptions& opts = {});

GNReport optimal_constant(double alpha, const FamilyTable& family, const ShootingOptions& opts = {});

/// E(f) - (1 - ||f||_2/||Q_1||_2) (1/2 ||grad f||^2 + 1/6 ||f||_6^6), with ||Q_1||_2^2 = m2.
double energy_lower_bound_check(const RadialField& f, double m2);

struct CurvePoint {
  double omega = 0.0;
  double mass = 0.0;
  double energy = 0.0;
};

struct CurveSet {
  std::vector<CurvePoint> soliton_curve;   // omega <= omega_star, ending at (m2, 0)
  std::vector<CurvePoint> rescaled_curve;  // every row
  double m0 = 0.0;
  std::optional<double> m1;
  double m2 = 0.0;
  double omega_star = 0.0;
  std::vector<double> omega_star_roots;  // every sign change of beta - 1
};

CurveSet boundary_curves(const FamilyTable& family, const ShootingOptions& opts = {});

std::string curves_csv(const CurveSet& c);
std::string curves_json(const CurveSet& c);

/// E(f_a) for f_a(x) = a^{3/2} f(a x), from the norms of f.
double scaled_energy(const NormIntegrals& n, double a);

/// a_0 with E(f_{a_0}) = target_E (smallest such a in [1e-6, 1e6]).
double scale_to_half_energy(const RadialField& f, double target_E);

}  // namespace cqnls
