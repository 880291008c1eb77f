#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqnls/groundstate.hpp"
#include "cqnls/linearized.hpp"
#include "cqnls/radial.hpp"

namespace cqnls {

/// Truncated power series in z = exp(-lambda1 t) with coefficients of
/// degree 0..D. Products drop everything above D.
class PowerSeries {
 public:
  explicit PowerSeries(std::size_t degree = 0) : c_(degree + 1, cplx(0.0)) {}
  explicit PowerSeries(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}

  std::size_t degree() const noexcept { return c_.size() - 1; }
  cplx& operator[](std::size_t j) { return c_[j]; }
  const cplx& operator[](std::size_t j) const { return c_[j]; }
  PowerSeries conj() const;

  friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b);
  friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b);
  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b);
  friend PowerSeries operator*(double s, const PowerSeries& a);

 private:
  std::vector<cplx> c_;
};

/// R(h) = N(P + h) - N(P) - N'(P) h with N(u) = |u|^2 u - |u|^4 u, written out
/// as a polynomial in (h, conj h) so that small h loses no precision.
template <class T>
T remainder_poly(double P, const T& h, const T& hb) {
  const T hh = h * h, hhb = h * hb, hbhb = hb * hb;
  const T h2hb = hh * hb, hhb2 = hhb * hb, h3 = hh * h;
  const T quad = hh + 2.0 * hhb;
  const T cub = h3 + 6.0 * h2hb + 3.0 * hhb2;
  const T quar = 2.0 * (h3 * hb) + 3.0 * (h2hb * hb);
  const T quin = h2hb * hhb;
  const double P2 = P * P;
  return h2hb - quin + P * (quad - quar) - P2 * cub - (P2 * P) * (3.0 * hh + 6.0 * hhb + hbhb);
}

/// Pointwise R(h) about the profile's P on the profile's grid.
RadialField remainder_R(const RadialField& h, const SolitonProfile& profile);
/// Same on interior v-samples (v = r h), using ops' copy of P.
std::vector<cplx> remainder_v(const LinearizedOperators& ops, std::span<const cplx> v);

/// Dense LU factorizations of Script L - s, cached per shift.
class ResolventContext {
 public:
  ResolventContext(const LinearizedOperators& ops, double lambda1);

  const LinearizedOperators& operators() const noexcept { return *ops_; }
  double lambda1() const noexcept { return lambda1_; }

  std::vector<cplx> solve_v(double shift, std::span<const cplx> rhs) const;
  /// Relative residual ||(Script L - s) g - rhs|| / ||rhs|| of the last solve.
  double last_residual() const noexcept { return last_residual_; }

 private:
  const LinearizedOperators* ops_;
  double lambda1_;
  mutable std::map<double, Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  mutable double last_residual_ = 0.0;
};

RadialField resolvent_solve(const ResolventContext& ctx, double shift, const RadialField& rhs);

struct ExponentialSeries {
  double omega = 0.0;
  double a = 0.0;
  int k = 0;
  double lambda1 = 0.0;
  std::vector<std::vector<cplx>> v;      // g_j in v space, index j - 1
  std::vector<RadialField> coefficients; // g_1..g_k
  std::vector<double> solve_residuals;   // per order; 0 for j = 1

  /// W_k(t) = sum_j exp(-j lambda1 t) g_j in v space.
  std::vector<cplx> evaluate_v(double t) const;
};

ExponentialSeries build_series(double a, int k, const SpectralData& spec, const ResolventContext& ctx);

struct RemainderTerm {
  int j = 0;
  std::vector<cplx> v;  // psi_j in v space
};

/// Coefficients psi_j of R(W_k) = sum_{j=2}^{5k} exp(-j lambda1 t) psi_j,
/// obtained by expanding R in the coefficient algebra.
std::vector<RemainderTerm> expand_remainder(const ExponentialSeries& series, const LinearizedOperators& ops);

struct ResidualProfile {
  std::vector<double> t_grid;
  std::vector<double> residual_norms;  // ||eps_k(t)||_{H1}
  std::vector<double> floor_norms;     // part coming from orders <= k (solve and eigen residuals)
  double fitted_slope = 0.0;
  double expected_slope = 0.0;         // -(k+1) lambda1
  std::size_t fit_begin = 0, fit_end = 0;  // usable window [begin, end)
  bool full_window = false;            // the whole grid was usable
};

/// eps_k(t) = d/dt W_k + Script L W_k - i R(W_k), assembled order by order in
/// z so that the cancellation between the large terms is exact.
ResidualProfile residual_decay(const ExponentialSeries& series, const LinearizedOperators& ops,
                               const std::vector<double>& t_grid);

/// The same residual evaluated directly at one time: the operators act on
/// W_k(t) and R is taken pointwise.
std::vector<cplx> direct_residual_v(const ExponentialSeries& series, const LinearizedOperators& ops, double t);

struct InitialData {
  RadialField u;             // exp(i omega t0) (P + W_k(t0)) on the requested grid
  double t0 = 0.0;
  double w_h1 = 0.0;         // ||W_k(t0)||_{H1}
  double mass_offset = 0.0;  // M(u) - M(P), both on the requested grid
  double energy_offset = 0.0;
  double leading_error = 0.0;  // ||W_k(t0) - a exp(-lambda1 t0) e+||_{H1}
};

/// Evaluates the series at t0 and places it on `grid` (the linearization grid
/// when omitted) by sine-series interpolation; P comes from the profile.
InitialData initial_data(const ExponentialSeries& series, const LinearizedOperators& ops,
                         const SolitonProfile& profile, double t0, std::optional<RadialGrid> grid = std::nullopt);

std::string series_manifest_json(const ExponentialSeries& s);

}  // namespace cqnls
