#include "cqnls/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"
#include "cqnls/sine_transform.hpp"

namespace cqnls {

PowerSeries PowerSeries::conj() const {
  PowerSeries r(*this);
  for (auto& x : r.c_) x = std::conj(x);
  return r;
}

PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(a);
  for (std::size_t j = 0; j <= r.degree(); ++j) r[j] += b[j];
  return r;
}

PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(a);
  for (std::size_t j = 0; j <= r.degree(); ++j) r[j] -= b[j];
  return r;
}

PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
  const std::size_t D = a.degree();
  PowerSeries r(D);
  for (std::size_t i = 0; i <= D; ++i) {
    if (a[i] == cplx(0.0)) continue;
    for (std::size_t j = 0; i + j <= D; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

PowerSeries operator*(double s, const PowerSeries& a) {
  PowerSeries r(a);
  for (std::size_t j = 0; j <= r.degree(); ++j) r[j] *= s;
  return r;
}

RadialField remainder_R(const RadialField& h, const SolitonProfile& profile) {
  require_same_grid(h.grid(), profile.field.grid());
  std::vector<cplx> out(h.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx x = h[i];
    out[i] = remainder_poly(profile.field[i].real(), x, std::conj(x));
  }
  return RadialField::complex(h.grid(), std::move(out));
}

std::vector<cplx> remainder_v(const LinearizedOperators& ops, std::span<const cplx> v) {
  const auto& g = ops.grid();
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = g.r(i + 1);
    const cplx x = v[i] / r;
    out[i] = r * remainder_poly(ops.P()[i + 1], x, std::conj(x));
  }
  return out;
}

ResolventContext::ResolventContext(const LinearizedOperators& ops, double lambda1) : ops_(&ops), lambda1_(lambda1) {
  if (!(lambda1 > 0.0)) throw Error(ErrorKind::invalid_argument, "lambda1 must be positive");
}

namespace {

double vnorm(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace

std::vector<cplx> ResolventContext::solve_v(double shift, std::span<const cplx> rhs) const {
  const double tol = 1e-6 * lambda1_;
  if (std::abs(shift) < tol || std::abs(shift - lambda1_) < tol || std::abs(shift + lambda1_) < tol) {
    throw Error(ErrorKind::singular_shift, "shift " + format_double(shift) + " lies on the real spectrum {-lambda1, 0, lambda1}");
  }
  const std::size_t N = ops_->dim();
  if (rhs.size() != N) throw Error(ErrorKind::invalid_field, "rhs has the wrong length");
  const double bn = vnorm(rhs);
  if (bn == 0.0) {
    last_residual_ = 0.0;
    return std::vector<cplx>(N, cplx(0.0));
  }
  auto it = lu_.find(shift);
  if (it == lu_.end()) it = lu_.emplace(shift, Eigen::PartialPivLU<Eigen::MatrixXd>(shifted_script_l(*ops_, shift))).first;
  const auto& lu = it->second;

  const auto n = static_cast<Eigen::Index>(N);
  Eigen::VectorXd b(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i) = rhs[i].real();
    b(n + i) = rhs[i].imag();
  }
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    std::vector<cplx> g(N);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = cplx(x(i), x(n + i));
    const auto lg = apply_script_l_v(*ops_, g);
    r.resize(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = b(i) - (lg[i].real() - shift * x(i));
      r(n + i) = b(n + i) - (lg[i].imag() - shift * x(n + i));
    }
  };
  Eigen::VectorXd x = lu.solve(b), r;
  // One step of refinement against the matrix-free operator.
  residual(x, r);
  x += lu.solve(r);
  residual(x, r);
  last_residual_ = r.norm() / b.norm();
  if (!(last_residual_ <= 1e-10)) {
    throw Error(ErrorKind::ill_conditioned, "resolvent residual " + format_double(last_residual_) + " above 1e-10");
  }
  std::vector<cplx> g(N);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = cplx(x(i), x(n + i));
  return g;
}

RadialField resolvent_solve(const ResolventContext& ctx, double shift, const RadialField& rhs) {
  const auto& ops = ctx.operators();
  require_same_grid(rhs.grid(), ops.grid());
  const auto g = ctx.solve_v(shift, ops.spectral().to_v(rhs));
  return ops.spectral().field_from_v(std::span<const cplx>(g));
}

namespace {

// psi_j for j = 0..D of R(sum_j z^j g_j), node by node.
std::vector<std::vector<cplx>> remainder_coefficients(const std::vector<std::vector<cplx>>& g,
                                                      const LinearizedOperators& ops, std::size_t D) {
  const std::size_t N = ops.dim();
  const auto& grid = ops.grid();
  std::vector<std::vector<cplx>> psi(D + 1, std::vector<cplx>(N, cplx(0.0)));
  for (std::size_t i = 0; i < N; ++i) {
    const double r = grid.r(i + 1);
    PowerSeries h(D);
    for (std::size_t j = 1; j <= g.size() && j <= D; ++j) h[j] = g[j - 1][i] / r;
    const PowerSeries R = remainder_poly(ops.P()[i + 1], h, h.conj());
    for (std::size_t j = 0; j <= D; ++j) psi[j][i] = r * R[j];
  }
  return psi;
}

}  // namespace

std::vector<cplx> ExponentialSeries::evaluate_v(double t) const {
  const std::size_t N = v.empty() ? 0 : v.front().size();
  std::vector<cplx> w(N, cplx(0.0));
  const double z = std::exp(-lambda1 * t);
  double zj = 1.0;
  for (const auto& g : v) {
    zj *= z;
    for (std::size_t i = 0; i < N; ++i) w[i] += zj * g[i];
  }
  return w;
}

ExponentialSeries build_series(double a, int k, const SpectralData& spec, const ResolventContext& ctx) {
  if (k < 1) throw Error(ErrorKind::invalid_argument, "series order k must be at least 1");
  if (!std::isfinite(a)) throw Error(ErrorKind::invalid_argument, "amplitude must be finite");
  const auto& ops = ctx.operators();
  ExponentialSeries s;
  s.omega = ops.omega();
  s.a = a;
  s.k = k;
  s.lambda1 = spec.lambda1;
  const std::size_t N = ops.dim();
  std::vector<cplx> g1(N);
  for (std::size_t i = 0; i < N; ++i) g1[i] = a * cplx(spec.v1[i], spec.v2[i]);
  s.v.push_back(std::move(g1));
  s.solve_residuals.push_back(0.0);
  for (int j = 2; j <= k; ++j) {
    const auto psi = remainder_coefficients(s.v, ops, static_cast<std::size_t>(j));
    std::vector<cplx> rhs(N);
    for (std::size_t i = 0; i < N; ++i) rhs[i] = cplx(0.0, 1.0) * psi[j][i];
    s.v.push_back(ctx.solve_v(j * spec.lambda1, rhs));
    s.solve_residuals.push_back(ctx.last_residual());
  }
  for (const auto& g : s.v) s.coefficients.push_back(ops.spectral().field_from_v(std::span<const cplx>(g)));
  return s;
}

std::vector<RemainderTerm> expand_remainder(const ExponentialSeries& series, const LinearizedOperators& ops) {
  const std::size_t D = 5 * static_cast<std::size_t>(series.k);
  const auto psi = remainder_coefficients(series.v, ops, D);
  std::vector<RemainderTerm> out;
  for (std::size_t j = 2; j <= D; ++j) out.push_back({static_cast<int>(j), psi[j]});
  return out;
}

ResidualProfile residual_decay(const ExponentialSeries& series, const LinearizedOperators& ops,
                               const std::vector<double>& t_grid) {
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::invalid_argument, "t_grid must be increasing");
  }
  const std::size_t k = static_cast<std::size_t>(series.k);
  const std::size_t D = 5 * k;
  const std::size_t N = ops.dim();
  const double lam = series.lambda1;
  const auto psi = remainder_coefficients(series.v, ops, D);
  // c_j = (Script L - j lambda1) g_j - i psi_j for j <= k, and -i psi_j above.
  std::vector<std::vector<cplx>> c(D + 1, std::vector<cplx>(N, cplx(0.0)));
  for (std::size_t j = 1; j <= D; ++j) {
    if (j <= k) {
      const auto& g = series.v[j - 1];
      const auto lg = apply_script_l_v(ops, g);
      for (std::size_t i = 0; i < N; ++i) c[j][i] = lg[i] - static_cast<double>(j) * lam * g[i];
    }
    for (std::size_t i = 0; i < N; ++i) c[j][i] -= cplx(0.0, 1.0) * psi[j][i];
  }
  ResidualProfile p;
  p.t_grid = t_grid;
  p.expected_slope = -static_cast<double>(k + 1) * lam;
  std::vector<cplx> eps(N), low(N);
  for (double t : t_grid) {
    const double z = std::exp(-lam * t);
    std::fill(eps.begin(), eps.end(), cplx(0.0));
    std::fill(low.begin(), low.end(), cplx(0.0));
    double zj = 1.0;
    for (std::size_t j = 1; j <= D; ++j) {
      zj *= z;
      for (std::size_t i = 0; i < N; ++i) {
        eps[i] += zj * c[j][i];
        if (j <= k) low[i] += zj * c[j][i];
      }
    }
    p.residual_norms.push_back(h1_norm_v(ops, eps));
    p.floor_norms.push_back(h1_norm_v(ops, low));
  }
  // Usable window: the leading run where the residual decreases and the
  // orders <= k contribute at most 1%.
  std::size_t end = 0;
  while (end < t_grid.size()) {
    const bool ok = p.residual_norms[end] > 0.0 && p.floor_norms[end] <= 1e-2 * p.residual_norms[end] &&
                    (end == 0 || p.residual_norms[end] < p.residual_norms[end - 1]);
    if (!ok) break;
    ++end;
  }
  p.fit_begin = 0;
  p.fit_end = end;
  p.full_window = end == t_grid.size();
  if (end >= 2) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < end; ++i) {
      const double y = std::log(p.residual_norms[i]);
      st += t_grid[i];
      sy += y;
      stt += t_grid[i] * t_grid[i];
      sty += t_grid[i] * y;
    }
    const double n = static_cast<double>(end);
    p.fitted_slope = (n * sty - st * sy) / (n * stt - st * st);
  } else {
    p.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

std::vector<cplx> direct_residual_v(const ExponentialSeries& series, const LinearizedOperators& ops, double t) {
  const std::size_t N = ops.dim();
  const double z = std::exp(-series.lambda1 * t);
  std::vector<cplx> w(N, cplx(0.0)), dw(N, cplx(0.0));
  double zj = 1.0;
  for (std::size_t j = 1; j <= series.v.size(); ++j) {
    zj *= z;
    for (std::size_t i = 0; i < N; ++i) {
      w[i] += zj * series.v[j - 1][i];
      dw[i] -= static_cast<double>(j) * series.lambda1 * zj * series.v[j - 1][i];
    }
  }
  const auto lw = apply_script_l_v(ops, w);
  const auto R = remainder_v(ops, w);
  std::vector<cplx> eps(N);
  for (std::size_t i = 0; i < N; ++i) eps[i] = dw[i] + lw[i] - cplx(0.0, 1.0) * R[i];
  return eps;
}

InitialData initial_data(const ExponentialSeries& series, const LinearizedOperators& ops,
                         const SolitonProfile& profile, double t0, std::optional<RadialGrid> grid) {
  if (!std::isfinite(t0)) throw Error(ErrorKind::invalid_argument, "t0 must be finite");
  const auto w = series.evaluate_v(t0);
  InitialData d{RadialField::zeros(ops.grid()), t0, h1_norm_v(ops, w), 0.0, 0.0, 0.0};
  const double p_h1 = std::sqrt(profile.norms.grad_sq + profile.norms.mass);
  if (d.w_h1 > 0.1 * p_h1) {
    throw Error(ErrorKind::precondition_violated, "t0 too small: ||W_k(t0)||_H1 = " + format_double(d.w_h1) +
                                                      " exceeds 0.1 ||P||_H1 = " + format_double(0.1 * p_h1));
  }
  {
    const double z = std::exp(-series.lambda1 * t0);
    std::vector<cplx> rest(w);
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= z * series.v[0][i];
    d.leading_error = h1_norm_v(ops, rest);
  }

  const RadialGrid target = grid.value_or(ops.grid());
  std::vector<double> re(w.size()), im(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    re[i] = w[i].real();
    im[i] = w[i].imag();
  }
  std::vector<cplx> wu(target.size(), cplx(0.0));
  if (target == ops.grid()) {
    const auto f = ops.spectral().field_from_v(std::span<const cplx>(w));
    for (std::size_t i = 0; i < wu.size(); ++i) wu[i] = f[i];
  } else {
    const auto& sp = ops.spectral();
    const auto cr = sp.coefficients(re), ci = sp.coefficients(im);
    const double rmax = ops.grid().r_max();
    for (std::size_t i = 1; i < target.size(); ++i) {
      const double r = target.r(i);
      if (r >= rmax) break;
      wu[i] = cplx(sp.interpolate(cr, r), sp.interpolate(ci, r)) / r;
    }
    const auto ev = [&](auto part) {
      return even_extrapolate_origin(part(wu[1]), part(wu[2]), part(wu[3]));
    };
    wu[0] = cplx(ev([](cplx x) { return x.real(); }), ev([](cplx x) { return x.imag(); }));
  }
  const auto P = target == ops.grid() ? profile.field.real_part()
                                      : RadialField::sample_real(target, [&](double r) { return profile.value_at(r); })
                                            .real_part();
  std::vector<cplx> u(target.size());
  const cplx phase = std::polar(1.0, series.omega * t0);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = phase * (P[i] + wu[i]);
  d.u = RadialField::complex(target, std::move(u));
  const auto fp = functionals(RadialField::real(target, P));
  const auto fu = functionals(d.u);
  d.mass_offset = fu.mass - fp.mass;
  d.energy_offset = fu.energy - fp.energy;
  return d;
}

std::string series_manifest_json(const ExponentialSeries& s) {
  std::ostringstream os;
  os << "{\"omega\": " << format_double(s.omega) << ", \"a\": " << format_double(s.a) << ", \"k\": " << s.k
     << ", \"lambda1\": " << format_double(s.lambda1) << ", \"t0_recommended\": " << format_double(8.0 / s.lambda1)
     << "}\n";
  return os.str();
}

}  // namespace cqnls
