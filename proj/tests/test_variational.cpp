#include <doctest.h>

#include <cmath>
#include <random>

#include "cqnls/error.hpp"
#include "cqnls/groundstate.hpp"
#include "cqnls/variational.hpp"

using namespace cqnls;

namespace {

const RadialGrid& fine() {
  static const RadialGrid g = make_grid(120.0, 6001);
  return g;
}

const FamilyTable& family() {
  static const FamilyTable t = sweep_family(default_omega_grid(20, 0.02, 0.18), fine());
  return t;
}

RadialField random_field(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), width(1.0, 8.0), shift(0.0, 6.0), chirp(-0.2, 0.2);
  std::vector<cplx> v(g.size(), 0.0);
  for (int b = 0; b < 3; ++b) {
    const double A = amp(rng), s = width(rng), c = shift(rng), k = chirp(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = g.r(i);
      v[i] += A * (std::exp(-(r - c) * (r - c) / (s * s)) + std::exp(-(r + c) * (r + c) / (s * s))) *
              std::polar(1.0, k * r * r);
    }
  }
  return RadialField::complex(g, v);
}

}  // namespace

TEST_CASE("quotient is invariant under amplitude and dilation") {
  std::mt19937_64 rng(5);
  const auto g = make_grid(60.0, 1201);
  const auto half = make_grid(30.0, 1201);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_field(g, rng);
    for (double alpha : {0.3, 1.0, 2.5}) {
      const double q = gn_quotient(f, alpha);
      CHECK(gn_quotient(f.scaled(cplx(0.0, 3.7)), alpha) == doctest::Approx(q).epsilon(1e-12));
      // same samples on a grid of half the size: f(2x)
      const auto d = RadialField::complex(half, std::vector<cplx>(f.values().begin(), f.values().end()));
      CHECK(gn_quotient(d, alpha) == doctest::Approx(q).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(gn_quotient(RadialField::zeros(g), 1.0), Error);
  CHECK_THROWS_AS(gn_quotient(random_field(g, rng), 0.0), Error);
}

TEST_CASE("optimal constant at alpha = 1") {
  const auto r = optimal_constant(1.0, family());
  REQUIRE(r.q1_l2.has_value());
  REQUIRE(r.m2.has_value());
  const auto star = solve_ground_state(r.optimizer_omega, fine());
  CHECK(star.beta == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(*r.q1_l2 == doctest::Approx(star.report.l2).epsilon(1e-6));
  CHECK(*r.m2 == doctest::Approx(*r.q1_l2 * *r.q1_l2).epsilon(1e-14));
  CHECK(r.c_alpha * r.quotient_at_optimizer == doctest::Approx(1.0));

  // no field beats the optimizer
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    CHECK(gn_quotient(random_field(fine(), rng), 1.0) >= r.quotient_at_optimizer * (1.0 - 1e-9));
  }
  const auto bumped = star.field + RadialField::sample_real(fine(), [](double r) { return 0.01 * std::exp(-r * r); });
  CHECK(gn_quotient(bumped, 1.0) > r.quotient_at_optimizer);
}

TEST_CASE("optimal constant at other exponents") {
  const auto at01 = solve_ground_state(0.1, fine());
  const auto r = optimal_constant(at01.beta, family());
  CHECK(r.optimizer_omega == doctest::Approx(0.1).epsilon(1e-8));
  CHECK_FALSE(r.q1_l2.has_value());
  try {
    optimal_constant(1e6, family());
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::out_of_range);
  }
  CHECK_THROWS_AS(optimal_constant(-1.0, family()), Error);
}

TEST_CASE("energy lower bound below the threshold mass") {
  const double m2 = *optimal_constant(1.0, family()).m2;
  const auto& g = fine();
  CHECK(energy_lower_bound_check(RadialField::zeros(g), m2) == 0.0);
  const auto p = solve_ground_state(0.08, g);
  CHECK(energy_lower_bound_check(p.field.scaled(0.1), m2) >= 0.0);
  try {
    energy_lower_bound_check(p.field.scaled(std::sqrt(m2 / p.norms.mass) * 1.01), m2);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition_violated);
  }
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> frac(0.02, 0.98);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_field(g, rng);
    const auto s = f.scaled(std::sqrt(frac(rng) * m2 / norm_integrals(f).mass));
    CHECK(energy_lower_bound_check(s, m2) >= -1e-10);
  }
}

TEST_CASE("boundary curves") {
  const auto c = boundary_curves(family());
  CHECK(c.m0 > 0.0);
  CHECK(c.m0 <= c.m2);
  if (c.m1) {
    CHECK(*c.m1 >= c.m0);
    CHECK(*c.m1 <= c.m2 * (1.0 + 1e-9));
  }
  CHECK(c.soliton_curve.back().energy == 0.0);
  CHECK(c.soliton_curve.back().mass == doctest::Approx(c.m2).epsilon(1e-14));
  CHECK(c.m2 == doctest::Approx(*optimal_constant(1.0, family()).m2).epsilon(1e-6));
  CHECK(c.omega_star == doctest::Approx(optimal_constant(1.0, family()).optimizer_omega).epsilon(1e-8));
  for (std::size_t i = 0; i + 1 < c.soliton_curve.size(); ++i) CHECK(c.soliton_curve[i].omega < c.omega_star);
  for (const auto& p : c.rescaled_curve) CHECK(p.energy > 0.0);
  CHECK(curves_csv(c).rfind("curve,omega,mass,energy\n", 0) == 0);

  FamilyTable few{family().grid, {family().rows.begin(), family().rows.begin() + 9}};
  try {
    boundary_curves(few);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("scaling to a prescribed energy") {
  // closed-form norms of A exp(-r^2)
  const double A = 3.0;
  NormIntegrals n;
  n.mass = A * A * std::pow(kPi / 2.0, 1.5);
  n.grad_sq = A * A * 3.0 * std::pow(kPi / 2.0, 1.5);
  n.l4_4 = std::pow(A, 4) * std::pow(kPi / 4.0, 1.5);
  n.l6_6 = std::pow(A, 6) * std::pow(kPi / 6.0, 1.5);
  const auto g = make_grid(15.0, 3001);
  const auto f = RadialField::sample_real(g, [&](double r) { return A * std::exp(-r * r); });
  CHECK(norm_integrals(f).grad_sq == doctest::Approx(n.grad_sq).epsilon(1e-8));

  const double target = 0.5;
  const double a0 = scale_to_half_energy(f, target);
  CHECK(scaled_energy(n, a0) == doctest::Approx(target).epsilon(1e-7));
  // dense scan for the smallest crossing
  double first = 0.0;
  for (double a = 1e-4; a < 100.0; a *= 1.0001) {
    if (scaled_energy(n, a) >= target) {
      first = a;
      break;
    }
  }
  CHECK(a0 == doctest::Approx(first).epsilon(2e-4));
  // the rescaled field keeps its mass and has the target energy
  const auto ga = make_grid(12.0 / a0, 3001);
  const auto fa = RadialField::sample_real(ga, [&](double r) { return std::pow(a0, 1.5) * A * std::exp(-a0 * a0 * r * r); });
  const auto na = norm_integrals(fa);
  CHECK(na.mass == doctest::Approx(n.mass).epsilon(1e-8));
  CHECK(energy_of(na) == doctest::Approx(target).epsilon(1e-6));
  CHECK_THROWS_AS(scale_to_half_energy(f, 0.0), Error);
}
