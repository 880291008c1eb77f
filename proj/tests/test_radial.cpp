#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/radial.hpp"

using namespace cqnls;

namespace {

// int_0^inf r^2 exp(-a r^2) dr and int_0^inf r^4 exp(-a r^2) dr
double m2(double a) { return std::sqrt(kPi) / (4.0 * std::pow(a, 1.5)); }
double m4(double a) { return 3.0 * std::sqrt(kPi) / (8.0 * std::pow(a, 2.5)); }

RadialField random_bumps(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), width(0.5, 3.0), shift(0.0, 4.0), chirp(-0.3, 0.3);
  std::vector<cplx> v(g.size(), 0.0);
  for (int b = 0; b < 3; ++b) {
    const double A = amp(rng), s = width(rng), c = shift(rng), k = chirp(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = g.r(i);
      const double e = std::exp(-(r - c) * (r - c) / (s * s)) + std::exp(-(r + c) * (r + c) / (s * s));
      v[i] += A * e * std::polar(1.0, k * r * r);
    }
  }
  return RadialField::complex(g, v);
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = make_grid(10.0, 101);
  CHECK(g.size() == 101);
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g.r(0) == 0.0);
  CHECK(g.r(100) == 10.0);
  CHECK(g.nodes().size() == 101);
  CHECK_THROWS_AS(make_grid(10.0, 15), Error);
  CHECK_THROWS_AS(make_grid(-1.0, 100), Error);
  CHECK_THROWS_AS(make_grid(INFINITY, 100), Error);
  try {
    make_grid(10.0, 3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("non-finite samples are rejected") {
  const auto g = make_grid(10.0, 32);
  std::vector<double> v(32, 1.0);
  v[5] = NAN;
  try {
    RadialField::real(g, v);
    FAIL("accepted NaN");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_field);
  }
  CHECK_THROWS_AS(RadialField::real(g, std::vector<double>(31, 0.0)), Error);
}

TEST_CASE("radial integral of known functions") {
  const auto g = make_grid(12.0, 1201);
  const auto f = RadialField::sample_real(g, [](double r) { return std::exp(-2.0 * r * r); });
  CHECK(std::abs(radial_integral(f, 2) - std::pow(kPi / 2.0, 1.5)) <= 1e-10);
  CHECK(radial_integral(RadialField::zeros(g), 2) == 0.0);
  // unit ball volume: the indicator is not smooth, so only first order
  const auto ball = RadialField::sample_real(g, [](double r) { return r <= 1.0 ? 1.0 : 0.0; });
  CHECK(radial_integral(ball, 2) == doctest::Approx(4.0 * kPi / 3.0).epsilon(0.05));
  const auto lin = RadialField::sample_real(g, [](double r) { return r; });
  CHECK(radial_integral(lin, 0) == doctest::Approx(72.0).epsilon(1e-12));
}

TEST_CASE("functionals of a Gaussian match closed forms") {
  const auto g = make_grid(12.0, 2401);
  const auto u = RadialField::sample_real(g, [](double r) { return std::exp(-r * r); });
  const auto n = norm_integrals(u);
  const double M = 4.0 * kPi * m2(2.0);
  const double G = 4.0 * kPi * 4.0 * m4(2.0);
  const double L4 = std::pow(kPi / 4.0, 1.5), L6 = std::pow(kPi / 6.0, 1.5);
  CHECK(n.mass == doctest::Approx(M).epsilon(1e-10));
  CHECK(n.grad_sq == doctest::Approx(G).epsilon(1e-8));
  CHECK(n.l4_4 == doctest::Approx(L4).epsilon(1e-10));
  CHECK(n.l6_6 == doctest::Approx(L6).epsilon(1e-10));
  CHECK(energy_of(n) == doctest::Approx(0.5 * G - 0.25 * L4 + L6 / 6.0).epsilon(1e-8));
  CHECK(virial_of(n) == doctest::Approx(G + L6 - 0.75 * L4).epsilon(1e-8));
  const auto rep = functionals(u);
  CHECK(rep.momentum == std::array<double, 3>{0.0, 0.0, 0.0});
  CHECK(rep.grad_sq() == doctest::Approx(n.grad_sq).epsilon(1e-14));
}

TEST_CASE("gradient quadrature converges at fourth order") {
  auto err = [](std::size_t n) {
    const auto g = make_grid(15.0, n);
    const auto u = RadialField::sample_real(g, [](double r) { return std::exp(-r * r); });
    return std::abs(norm_integrals(u).grad_sq - 4.0 * kPi * 4.0 * m4(2.0));
  };
  const double e1 = err(61), e2 = err(121);
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("F at infinite radius equals 8 V") {
  std::mt19937_64 rng(11);
  const auto g = make_grid(30.0, 1501);
  const auto w = virial_weight(kInfiniteRadius, g);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = random_bumps(g, rng);
    const double F = localized_virial_F(u, w), V = virial_of(norm_integrals(u));
    CHECK(std::abs(F - 8.0 * V) <= 1e-10 * (1.0 + std::abs(F)));
  }
}

TEST_CASE("virial weight") {
  const auto g = make_grid(20.0, 2001);
  const auto inf = virial_weight(kInfiniteRadius, g);
  CHECK(inf.infinite());
  for (std::size_t i = 0; i < g.size(); i += 97) {
    CHECK(inf.lap[i] == 6.0);
    CHECK(inf.bilap[i] == 0.0);
    CHECK(inf.w[i] == doctest::Approx(g.r(i) * g.r(i)));
  }
  const auto w5 = virial_weight(5.0, g);
  CHECK(w5.w[200] == doctest::Approx(4.0));  // r = 2
  CHECK(w5.dw[200] == doctest::Approx(4.0));
  CHECK(w5.d2w[200] == doctest::Approx(2.0));
  const std::size_t far = 1200;  // r = 12 > 2R
  CHECK(w5.dw[far] == 0.0);
  CHECK(w5.d2w[far] == 0.0);
  CHECK(w5.lap[far] == 0.0);
  CHECK(w5.bilap[far] == 0.0);
  CHECK(w5.w[far] == doctest::Approx(w5.w[2000]));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(w5.d2w[i] <= 2.0 + 1e-12);
    CHECK(w5.dw[i] >= 0.0);
    if (i > 0) CHECK(w5.w[i] >= w5.w[i - 1]);
  }
  CHECK(cutoff_chi(0.5) == 1.0);
  CHECK(cutoff_chi(2.5) == 0.0);
  for (double s = 1.0; s <= 2.0; s += 0.01) CHECK(cutoff_chi(s, 1) <= 1e-15);
  CHECK_THROWS_AS(virial_weight(0.5, g), Error);
  CHECK_THROWS_AS(virial_weight(NAN, g), Error);
}

TEST_CASE("localized virial P") {
  const auto g = make_grid(12.0, 2401);
  const auto w = virial_weight(kInfiniteRadius, g);
  const auto real = RadialField::sample_real(g, [](double r) { return std::exp(-r * r); });
  CHECK(localized_virial_P(real, w) == 0.0);
  CHECK(localized_virial_P(RadialField::zeros(g), w) == 0.0);
  const double kappa = 0.3;
  const auto chirped = RadialField::sample_complex(g, [&](double r) { return std::exp(cplx(-1.0, kappa) * r * r); });
  const double exact = 32.0 * kPi * kappa * m4(2.0);
  CHECK(localized_virial_P(chirped, w) == doctest::Approx(exact).epsilon(1e-8));
  CHECK(localized_virial_P(chirped.conj(), w) == doctest::Approx(-exact).epsilon(1e-8));
}

TEST_CASE("field text round trip is exact") {
  std::mt19937_64 rng(3);
  const auto g = make_grid(17.3, 333);
  const auto u = random_bumps(g, rng);
  std::stringstream ss;
  write_field(ss, u);
  const auto back = read_field(ss);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == u[i]);
  std::stringstream bad("r re im\n0 1 0\n");
  CHECK_THROWS_AS(read_field(bad), Error);
}
