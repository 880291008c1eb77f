#include "cqnls/variational.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"

namespace cqnls {

double gn_quotient(const NormIntegrals& n, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be positive");
  if (!(n.mass > 0.0) || !(n.l4_4 > 0.0)) throw Error(ErrorKind::invalid_argument, "zero field");
  // ||f||_{H1dot}^{3/(1+a)} = (grad_sq)^{3/(2(1+a))}, ||f||_6^{3a/(1+a)} = (l6_6)^{a/(2(1+a))}.
  const double e = 1.0 + alpha;
  return std::sqrt(n.mass) * std::pow(n.grad_sq, 1.5 / e) * std::pow(n.l6_6, 0.5 * alpha / e) / n.l4_4;
}

double gn_quotient(const RadialField& f, double alpha) { return gn_quotient(norm_integrals(f), alpha); }

namespace {

double beta_at(double omega, const RadialGrid& grid, const ShootingOptions& opts) {
  return solve_ground_state(omega, grid, opts).beta;
}

}  // namespace

double omega_for_beta(double target, const FamilyTable& family, const ShootingOptions& opts) {
  const auto& rows = family.rows;
  if (rows.size() < 2) throw Error(ErrorKind::insufficient_data, "family needs at least two rows");
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = rows[i].beta - target, b = rows[i + 1].beta - target;
    if (a == 0.0) return rows[i].omega;
    if (b == 0.0) return rows[i + 1].omega;
    if (a * b > 0.0) continue;
    auto f = [&](double w) { return beta_at(w, family.grid, opts) - target; };
    boost::uintmax_t iters = 100;
    auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-13 * std::abs(x); };
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(f, rows[i].omega, rows[i + 1].omega, a, b, tol, iters);
    return 0.5 * (lo + hi);
  }
  throw Error(ErrorKind::out_of_range, "beta=" + format_double(target) + " is not attained by the family");
}

GNReport optimal_constant(double alpha, const FamilyTable& family, const ShootingOptions& opts) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be positive");
  const double w = omega_for_beta(alpha, family, opts);
  const auto p = solve_ground_state(w, family.grid, opts);
  GNReport r;
  r.alpha = alpha;
  r.optimizer_omega = w;
  r.quotient_at_optimizer = gn_quotient(p.norms, alpha);
  r.c_alpha = 1.0 / r.quotient_at_optimizer;
  if (alpha == 1.0) {
    r.q1_l2 = (8.0 / 3.0) / r.c_alpha;
    r.m2 = *r.q1_l2 * *r.q1_l2;
  }
  return r;
}

double energy_lower_bound_check(const RadialField& f, double m2) {
  if (!(m2 > 0.0)) throw Error(ErrorKind::invalid_argument, "m2 must be positive");
  const auto n = norm_integrals(f);
  if (n.mass >= m2) throw Error(ErrorKind::precondition_violated, "mass is not below m2; the bound is vacuous");
  const double factor = 1.0 - std::sqrt(n.mass / m2);
  return energy_of(n) - factor * (0.5 * n.grad_sq + n.l6_6 / 6.0);
}

namespace {

struct Crossing {
  double s_omega, r_omega, mass, energy;
};

// Intersection of segments p0-p1 and q0-q1 with parameters in [0, 1].
std::optional<std::array<double, 2>> segment_cross(const CurvePoint& p0, const CurvePoint& p1, const CurvePoint& q0,
                                                   const CurvePoint& q1) {
  const double ax = p1.mass - p0.mass, ay = p1.energy - p0.energy;
  const double bx = q1.mass - q0.mass, by = q1.energy - q0.energy;
  const double den = ax * by - ay * bx;
  if (den == 0.0) return std::nullopt;
  const double cx = q0.mass - p0.mass, cy = q0.energy - p0.energy;
  const double s = (cx * by - cy * bx) / den;
  const double t = (cx * ay - cy * ax) / den;
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
  return std::array<double, 2>{s, t};
}

std::array<double, 4> mass_energy(double w, const RadialGrid& grid, const ShootingOptions& opts) {
  const auto row = family_row(solve_ground_state(w, grid, opts));
  return {row.mass_P, row.energy_P, row.mass_R, row.energy_R};
}

// Newton on (omega_s, omega_r) so that (M, E)(P_{omega_s}) = (M, E)(R_{omega_r}).
std::optional<Crossing> refine_crossing(Crossing c, const RadialGrid& grid, const ShootingOptions& opts) {
  Eigen::Vector2d x(c.s_omega, c.r_omega);
  auto F = [&](const Eigen::Vector2d& v) {
    const auto a = mass_energy(v(0), grid, opts);
    const auto b = mass_energy(v(1), grid, opts);
    // Scale the energy mismatch so both components are comparable.
    return Eigen::Vector2d(a[0] - b[2], 100.0 * (a[1] - b[3]));
  };
  try {
    for (int it = 0; it < 12; ++it) {
      const Eigen::Vector2d f = F(x);
      Eigen::Matrix2d J;
      const double h = 1e-6;
      for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d xp = x;
        xp(j) += h;
        J.col(j) = (F(xp) - f) / h;
      }
      const Eigen::Vector2d dx = J.partialPivLu().solve(-f);
      x += dx;
      if (!(x(0) > 0.0 && x(0) < kOmegaMax && x(1) > 0.0 && x(1) < kOmegaMax)) return std::nullopt;
      if (dx.lpNorm<Eigen::Infinity>() < 1e-11) break;
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  const auto a = mass_energy(x(0), grid, opts);
  return Crossing{x(0), x(1), a[0], a[1]};
}

}  // namespace

CurveSet boundary_curves(const FamilyTable& family, const ShootingOptions& opts) {
  const auto& rows = family.rows;
  if (rows.size() < 10) throw Error(ErrorKind::insufficient_data, "boundary curves need at least 10 family rows");
  CurveSet c;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = rows[i].beta - 1.0, b = rows[i + 1].beta - 1.0;
    if (a == 0.0 || a * b < 0.0) {
      FamilyTable pair{family.grid, {rows[i], rows[i + 1]}};
      c.omega_star_roots.push_back(omega_for_beta(1.0, pair, opts));
    }
  }
  if (rows.back().beta == 1.0) c.omega_star_roots.push_back(rows.back().omega);
  if (c.omega_star_roots.empty()) throw Error(ErrorKind::out_of_range, "beta = 1 is not attained by the family");
  c.omega_star = c.omega_star_roots.front();
  const auto star = solve_ground_state(c.omega_star, family.grid, opts);
  c.m2 = star.norms.mass;

  for (const auto& r : rows) {
    if (r.omega < c.omega_star) c.soliton_curve.push_back({r.omega, r.mass_P, r.energy_P});
    c.rescaled_curve.push_back({r.omega, r.mass_R, r.energy_R});
  }
  // The endpoint is exact: E = (1 - beta)/6 ||grad P||^2 vanishes at beta = 1.
  c.soliton_curve.push_back({c.omega_star, c.m2, 0.0});

  c.m0 = c.soliton_curve.front().mass;
  for (const auto& p : c.soliton_curve) c.m0 = std::min(c.m0, p.mass);
  for (const auto& p : c.rescaled_curve) c.m0 = std::min(c.m0, p.mass);

  std::optional<Crossing> first;
  for (std::size_t i = 0; i + 1 < c.soliton_curve.size() && !first; ++i) {
    for (std::size_t j = 0; j + 1 < c.rescaled_curve.size(); ++j) {
      const auto& p0 = c.soliton_curve[i];
      const auto& p1 = c.soliton_curve[i + 1];
      const auto& q0 = c.rescaled_curve[j];
      const auto& q1 = c.rescaled_curve[j + 1];
      if (auto st = segment_cross(p0, p1, q0, q1)) {
        const double s = (*st)[0], t = (*st)[1];
        first = Crossing{p0.omega + s * (p1.omega - p0.omega), q0.omega + t * (q1.omega - q0.omega),
                         p0.mass + s * (p1.mass - p0.mass), p0.energy + s * (p1.energy - p0.energy)};
        break;
      }
    }
  }
  if (first) {
    if (auto refined = refine_crossing(*first, family.grid, opts)) first = refined;
    c.m1 = first->mass;
  }
  return c;
}

std::string curves_csv(const CurveSet& c) {
  std::ostringstream os;
  os << "curve,omega,mass,energy\n";
  for (const auto& p : c.soliton_curve) {
    os << "soliton," << format_double(p.omega) << ',' << format_double(p.mass) << ',' << format_double(p.energy) << '\n';
  }
  for (const auto& p : c.rescaled_curve) {
    os << "rescaled," << format_double(p.omega) << ',' << format_double(p.mass) << ',' << format_double(p.energy)
       << '\n';
  }
  return os.str();
}

std::string curves_json(const CurveSet& c) {
  std::ostringstream os;
  os << "{\"m0\": " << format_double(c.m0) << ", \"m1\": " << (c.m1 ? format_double(*c.m1) : std::string("null"))
     << ", \"m2\": " << format_double(c.m2) << ", \"omega_star\": " << format_double(c.omega_star) << "}\n";
  return os.str();
}

double scaled_energy(const NormIntegrals& n, double a) {
  return 0.5 * a * a * n.grad_sq + std::pow(a, 6) / 6.0 * n.l6_6 - 0.25 * a * a * a * n.l4_4;
}

double scale_to_half_energy(const RadialField& f, double target_E) {
  if (!(target_E > 0.0)) throw Error(ErrorKind::invalid_argument, "target energy must be positive");
  const auto n = norm_integrals(f);
  if (!(n.mass > 0.0)) throw Error(ErrorKind::invalid_argument, "zero field");
  auto g = [&](double a) { return scaled_energy(n, a) - target_E; };
  // E(f_a) -> 0 as a -> 0, so the first sign change on a log scan brackets
  // the smallest solution.
  constexpr int kScan = 1200;
  double prev_a = 1e-6, prev_g = g(prev_a);
  if (prev_g >= 0.0) throw Error(ErrorKind::no_convergence, "E(f_a) already exceeds the target at a = 1e-6");
  for (int i = 1; i <= kScan; ++i) {
    const double a = std::pow(10.0, -6.0 + 12.0 * i / kScan);
    const double ga = g(a);
    if (ga >= 0.0) {
      double lo = prev_a, hi = a;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) < 0.0 ? lo : hi) = mid;
        if (std::abs(g(0.5 * (lo + hi))) <= 1e-10 * target_E) break;
      }
      const double a0 = 0.5 * (lo + hi);
      if (std::abs(g(a0)) > 1e-10 * target_E) {
        const double best = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
        if (std::abs(g(best)) > 1e-10 * target_E) throw Error(ErrorKind::no_convergence, "bisection stalled");
        return best;
      }
      return a0;
    }
    prev_a = a;
  }
  throw Error(ErrorKind::no_convergence, "no a in [1e-6, 1e6] reaches the target energy");
}

}  // namespace cqnls
