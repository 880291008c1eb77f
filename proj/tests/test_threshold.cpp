#include <doctest.h>

#include <cmath>
#include <random>

#include "cqnls/error.hpp"
#include "cqnls/groundstate.hpp"
#include "cqnls/linearized.hpp"
#include "cqnls/threshold.hpp"

using namespace cqnls;

namespace {

constexpr double kOmega = 0.015;

struct Setup {
  SolitonProfile profile;
  LinearizedOperators ops;
  SpectralData spec;
  ResolventContext ctx;
  Setup()
      : profile(solve_ground_state(kOmega, make_grid(200.0, 1001))),
        ops(profile),
        spec(internal_mode(ops)),
        ctx(ops, spec.lambda1) {}
};

const Setup& base() {
  static const Setup s;
  return s;
}

cplx nonlinearity(cplx u) {
  const double a = std::norm(u);
  return a * u - a * a * u;
}

double vnorm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double vdiff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("remainder polynomial") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-0.4, 0.4), Pd(0.0, 1.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const double P = Pd(rng);
    const cplx h(U(rng), U(rng));
    const cplx hb = std::conj(h);
    const double P2 = P * P, P4 = P2 * P2;
    const cplx lin = 2.0 * P2 * h + P2 * hb - 3.0 * P4 * h - 2.0 * P4 * hb;
    const cplx direct = nonlinearity(P + h) - nonlinearity(P) - lin;
    CHECK(std::abs(remainder_poly(P, h, hb) - direct) <= 1e-13);
  }
  CHECK(remainder_poly(0.7, cplx(0.0), cplx(0.0)) == cplx(0.0));
  // quadratic at the origin
  const cplx h(0.3, -0.2);
  const double r1 = std::abs(remainder_poly(0.7, 1e-3 * h, 1e-3 * std::conj(h)));
  const double r2 = std::abs(remainder_poly(0.7, 5e-4 * h, 5e-4 * std::conj(h)));
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("remainder on fields") {
  const auto& s = base();
  const auto& g = s.profile.field.grid();
  const auto h = RadialField::sample_complex(g, [](double r) { return cplx(0.1, 0.05) * std::exp(-r * r / 50.0); });
  const auto R = remainder_R(h, s.profile);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    const double P = s.profile.field[i].real();
    const double P2 = P * P, P4 = P2 * P2;
    const cplx x = h[i];
    const cplx lin = 2.0 * P2 * x + P2 * std::conj(x) - 3.0 * P4 * x - 2.0 * P4 * std::conj(x);
    CHECK(std::abs(R[i] - (nonlinearity(P + x) - nonlinearity(P) - lin)) <= 1e-13);
  }
}

TEST_CASE("resolvent") {
  const auto& s = base();
  const double lam = s.spec.lambda1;
  const std::vector<cplx> zero(s.ops.dim(), cplx(0.0));
  for (double shift : {0.0, lam, -lam}) {
    try {
      s.ctx.solve_v(shift, zero);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::singular_shift);
    }
  }
  const auto x0 = s.ctx.solve_v(2.0 * lam, zero);
  CHECK(vnorm(x0) == 0.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N01;
  std::vector<cplx> rhs(s.ops.dim());
  const auto& g = s.ops.grid();
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double r = g.r(i + 1);
    rhs[i] = cplx(N01(rng), N01(rng)) * r * std::exp(-r / 10.0);
  }
  const auto x = s.ctx.solve_v(2.0 * lam, rhs);
  CHECK(s.ctx.last_residual() <= 1e-10);
  auto lx = apply_script_l_v(s.ops, x);
  for (std::size_t i = 0; i < lx.size(); ++i) lx[i] -= 2.0 * lam * x[i];
  CHECK(vdiff(lx, rhs) <= 1e-9 * vnorm(rhs));
  CHECK_THROWS_AS(ResolventContext(s.ops, -1.0), Error);
}

TEST_CASE("exponential series") {
  const auto& s = base();
  const auto zero = build_series(0.0, 3, s.spec, s.ctx);
  for (const auto& g : zero.v) CHECK(vnorm(g) == 0.0);

  const auto one = build_series(1.0, 4, s.spec, s.ctx);
  REQUIRE(one.v.size() == 4);
  for (std::size_t i = 0; i < s.ops.dim(); ++i) CHECK(one.v[0][i] == cplx(s.spec.v1[i], s.spec.v2[i]));
  for (double r : one.solve_residuals) CHECK(r <= 1e-10);

  // g_j(c a) = c^j g_j(a)
  for (double c : {-1.0, 0.5, 2.0}) {
    const auto sc = build_series(c, 4, s.spec, s.ctx);
    for (int j = 1; j <= 4; ++j) {
      std::vector<cplx> expect(one.v[j - 1]);
      for (auto& x : expect) x *= std::pow(c, j);
      CHECK(vdiff(sc.v[j - 1], expect) <= 1e-9 * vnorm(expect));
    }
  }
  // coefficients are localized like P
  for (const auto& g : one.v) {
    double inner = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) (i < g.size() / 2 ? inner : outer) += std::norm(g[i]);
    CHECK(outer <= 1e-10 * inner);
  }
  CHECK_THROWS_AS(build_series(1.0, 0, s.spec, s.ctx), Error);
  CHECK_THROWS_AS(build_series(NAN, 2, s.spec, s.ctx), Error);
  CHECK(series_manifest_json(one).find("\"k\": 4") != std::string::npos);
}

TEST_CASE("expanded remainder matches pointwise evaluation") {
  const auto& s = base();
  const auto k1 = build_series(1.0, 1, s.spec, s.ctx);
  const auto terms1 = expand_remainder(k1, s.ops);
  REQUIRE(terms1.size() == 4);
  CHECK(terms1.front().j == 2);
  CHECK(terms1.back().j == 5);
  const auto ser = build_series(1.0, 3, s.spec, s.ctx);
  const auto terms = expand_remainder(ser, s.ops);
  CHECK(terms.back().j == 15);
  for (double tl : {3.0, 6.0}) {
    const double t = tl / s.spec.lambda1, z = std::exp(-s.spec.lambda1 * t);
    std::vector<cplx> sum(s.ops.dim(), cplx(0.0));
    for (const auto& term : terms) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += std::pow(z, term.j) * term.v[i];
    }
    const auto direct = remainder_v(s.ops, ser.evaluate_v(t));
    CHECK(vdiff(sum, direct) <= 1e-10 * vnorm(direct));
  }
  for (const auto& term : expand_remainder(build_series(0.0, 2, s.spec, s.ctx), s.ops)) CHECK(vnorm(term.v) == 0.0);
}

TEST_CASE("residual decays one order of lambda1 faster per term") {
  const auto& s = base();
  const double lam = s.spec.lambda1;
  std::vector<double> t;
  for (int i = 0; i <= 16; ++i) t.push_back((4.0 + 0.5 * i) / lam);
  double prev = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const auto ser = build_series(1.0, k, s.spec, s.ctx);
    const auto p = residual_decay(ser, s.ops, t);
    CHECK(p.expected_slope == doctest::Approx(-(k + 1) * lam));
    REQUIRE(p.fit_end >= 3);
    CHECK(p.fitted_slope / p.expected_slope == doctest::Approx(1.0).epsilon(0.05));
    if (k == 2) CHECK(p.fitted_slope - prev == doctest::Approx(-lam).epsilon(0.1));
    prev = p.fitted_slope;
    // the assembled residual matches the direct one where it is above rounding
    const double direct = h1_norm_v(s.ops, direct_residual_v(ser, s.ops, t[0]));
    CHECK(direct == doctest::Approx(p.residual_norms[0]).epsilon(1e-3));
  }
  const auto z = residual_decay(build_series(0.0, 2, s.spec, s.ctx), s.ops, t);
  for (double r : z.residual_norms) CHECK(r == 0.0);
  CHECK_THROWS_AS(residual_decay(build_series(1.0, 1, s.spec, s.ctx), s.ops, {2.0, 1.0}), Error);
}

TEST_CASE("initial data") {
  const auto& s = base();
  const double lam = s.spec.lambda1, t0 = 8.0 / lam;
  const auto d0 = initial_data(build_series(0.0, 2, s.spec, s.ctx), s.ops, s.profile, t0);
  CHECK(d0.w_h1 == 0.0);
  const cplx phase = std::polar(1.0, kOmega * t0);
  for (std::size_t i = 0; i < d0.u.size(); ++i) CHECK(d0.u[i] == phase * s.profile.field[i].real());

  const auto ser = build_series(1.0, 4, s.spec, s.ctx);
  const auto d = initial_data(ser, s.ops, s.profile, t0);
  CHECK(std::abs(d.mass_offset) <= 1e-4 * s.profile.norms.mass);
  CHECK(d.leading_error <= std::exp(-1.5 * lam * t0));
  CHECK(d.w_h1 > 0.0);
  CHECK(virial_of(norm_integrals(d.u)) > 0.0);
  // on a larger grid the interpolated data carries the same mass
  const auto big = initial_data(ser, s.ops, s.profile, t0, make_grid(400.0, 2001));
  CHECK(big.u.grid() == make_grid(400.0, 2001));
  CHECK(norm_integrals(big.u).mass == doctest::Approx(norm_integrals(d.u).mass).epsilon(1e-6));
  try {
    initial_data(ser, s.ops, s.profile, -20.0 / lam);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition_violated);
  }
}
