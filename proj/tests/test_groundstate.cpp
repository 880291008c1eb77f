#include <doctest.h>

#include <cmath>

#include "cqnls/error.hpp"
#include "cqnls/groundstate.hpp"

using namespace cqnls;

namespace {

const SolitonProfile& fine_profile() {
  static const SolitonProfile p = solve_ground_state(0.1, make_grid(120.0, 6001));
  return p;
}

ErrorKind kind_of(double omega) {
  try {
    solve_ground_state(omega, make_grid(60.0, 3001));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("frequencies outside (0, 3/16) are rejected") {
  CHECK(kind_of(3.0 / 16.0) == ErrorKind::out_of_range);
  CHECK(kind_of(0.2) == ErrorKind::out_of_range);
  CHECK(kind_of(0.0) == ErrorKind::out_of_range);
  CHECK(kind_of(-0.05) == ErrorKind::out_of_range);
}

TEST_CASE("ground state satisfies the Pohozaev identities") {
  const auto p = solve_ground_state(0.1, make_grid(60.0, 3001));
  CHECK(pohozaev_report(p).max() <= 1e-6);
  CHECK(std::abs(virial_of(p.norms)) <= 1e-6 * p.norms.grad_sq);
  CHECK(p.beta == doctest::Approx(p.norms.l6_6 / p.norms.grad_sq).epsilon(1e-12));
  CHECK(p.beta > 0.0);
}

TEST_CASE("identities detect a non-solution") {
  const auto& p = fine_profile();
  const auto& g = p.field.grid();
  const auto bent = RadialField::sample_real(g, [&](double r) { return p.value_at(r) * (1.0 + 0.05 * std::exp(-r * r)); });
  CHECK(pohozaev_report(profile_from_field(0.1, bent)).max() > 1e-3);
}

TEST_CASE("gradient norm converges at fourth order in h") {
  const ShootingOptions opts;
  double G[3];
  const std::size_t ns[3] = {751, 1501, 3001};
  for (int i = 0; i < 3; ++i) G[i] = solve_ground_state(0.1, make_grid(60.0, ns[i]), opts).norms.grad_sq;
  const double ratio = (G[0] - G[1]) / (G[1] - G[2]);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("profile solves the stationary equation, decays and is monotone") {
  const auto& p = fine_profile();
  const auto& g = p.field.grid();
  const auto lap = radial_laplacian(p.field);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.size() / 2; ++i) {
    const double P = p.field[i].real();
    const double res = -lap[i].real() + p.omega * P - P * P * P + P * P * P * P * P;
    worst = std::max(worst, std::abs(res));
    scale = std::max(scale, P * P * P);
  }
  CHECK(worst <= 1e-6 * scale);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(p.field[i].real() <= p.field[i - 1].real());
  CHECK(p.field[0].real() == p.p0);
  // log(r P) has slope -sqrt(omega) in the far field
  const double r1 = 30.0, r2 = 60.0;
  const double slope = (std::log(r2 * p.value_at(r2)) - std::log(r1 * p.value_at(r1))) / (r2 - r1);
  CHECK(slope == doctest::Approx(-std::sqrt(p.omega)).epsilon(0.02));
}

TEST_CASE("rescaled soliton") {
  const auto& p = fine_profile();
  const auto R = rescaled_soliton(p);
  const auto n = norm_integrals(R);
  CHECK(std::abs(virial_of(n)) <= 1e-6 * n.grad_sq);
  const auto c1 = rescaling_constants(1.0);
  CHECK(c1[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(c1[1] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(rescaling_constants(0.0), Error);
  try {
    rescaling_constants(-1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_profile);
  }
}

TEST_CASE("localized virial of the profile") {
  const auto& p = fine_profile();
  const auto& g = p.field.grid();
  const double Finf = localized_virial_F(p.field, virial_weight(kInfiniteRadius, g));
  CHECK(std::abs(Finf) <= 1e-7 * p.norms.grad_sq);
  // A finite radius only adds the tail mass beyond R, which is small but not zero.
  const double F10 = localized_virial_F(p.field, virial_weight(10.0, g));
  CHECK(std::abs(F10) <= 1e-2 * p.norms.grad_sq);
}

TEST_CASE("family sweep across the frequency range") {
  std::vector<double> omegas;
  for (int i = 0; i <= 32; ++i) omegas.push_back(0.02 + 0.005 * i);
  const auto t = sweep_family(omegas, make_grid(120.0, 6001));
  REQUIRE(t.rows.size() == omegas.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    CHECK(r.omega == omegas[i]);
    CHECK(r.beta > 0.0);
    CHECK(r.energy_R > 0.0);
    CHECK(r.energy_P == doctest::Approx((1.0 - r.beta) / 6.0 * r.grad_sq_P).epsilon(1e-6));
    if (i > 0) CHECK(r.beta > t.rows[i - 1].beta);  // beta increases with omega
  }
  const auto single = sweep_family({0.1}, make_grid(120.0, 6001));
  CHECK(single.rows.size() == 1);
  CHECK(single.rows[0].beta == doctest::Approx(t.rows[16].beta).epsilon(1e-9));
  const auto csv = family_csv(single);
  CHECK(csv.rfind("omega,mass_P,energy_P,beta,h1dot_P,p0,mass_R,energy_R\n", 0) == 0);
}

TEST_CASE("default frequency grid") {
  const auto w = default_omega_grid(60, 0.02, 0.18);
  CHECK(w.size() == 60);
  CHECK(w.front() == doctest::Approx(0.02));
  CHECK(w.back() == doctest::Approx(0.18));
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] > w[i - 1]);
  CHECK_THROWS_AS(default_omega_grid(1), Error);
}
