#include "cqnls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"

namespace cqnls {

void validate(const EvolutionConfig& cfg, const RadialGrid& grid) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
  if (!std::isfinite(cfg.t_start) || !std::isfinite(cfg.t_end) || cfg.t_start == cfg.t_end) {
    throw Error(ErrorKind::invalid_argument, "t_span must be a finite nonempty interval");
  }
  if (!(cfg.layer_width >= 0.0) || cfg.layer_width > 0.2 * grid.r_max() + 1e-12) {
    throw Error(ErrorKind::invalid_argument, "absorbing layer must lie inside [0.8 r_max, r_max]");
  }
  if (!(cfg.layer_strength >= 0.0) || !std::isfinite(cfg.layer_strength)) {
    throw Error(ErrorKind::invalid_argument, "layer strength must be nonnegative");
  }
  if (cfg.record_every == 0) throw Error(ErrorKind::invalid_argument, "record_every must be at least 1");
}

std::vector<double> sample_profile(const SolitonProfile& profile, const RadialGrid& grid) {
  if (grid == profile.field.grid()) return profile.field.real_part();
  std::vector<double> P(grid.size());
  for (std::size_t i = 0; i < P.size(); ++i) P[i] = profile.value_at(grid.r(i));
  return P;
}

namespace {

double h1_sq(const InteriorSpectral& sp, std::vector<cplx> v) {
  double l2 = 0.0;
  for (const auto& x : v) l2 += std::norm(x);
  sp.transform().apply(std::span<cplx>(v));
  double g = 0.0;
  for (std::size_t m = 0; m < v.size(); ++m) g += sp.wavenumbers()[m] * sp.wavenumbers()[m] * std::norm(v[m]);
  return sp.weight() * (g + l2);
}

double grad_sq_v(const InteriorSpectral& sp, std::vector<cplx> v) {
  sp.transform().apply(std::span<cplx>(v));
  double g = 0.0;
  for (std::size_t m = 0; m < v.size(); ++m) g += sp.wavenumbers()[m] * sp.wavenumbers()[m] * std::norm(v[m]);
  return sp.weight() * g;
}

}  // namespace

DiagnosticRow diagnose(const InteriorSpectral& sp, std::span<const cplx> v, double t, const VirialWeight& w,
                       std::span<const double> P) {
  const auto& g = sp.grid();
  const std::size_t N = v.size();
  const double wt = sp.weight();
  DiagnosticRow d;
  d.t = t;
  double m = 0, l4 = 0, l6 = 0, pr = 0, fr = 0;
  const auto dv = sp.derivative(v);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t node = i + 1;
    const double r = g.r(node);
    const double a = std::norm(v[i]);
    const double u2 = a / (r * r);
    m += a;
    l4 += a * u2;
    l6 += a * u2 * u2;
    pr += w.dw[node] * (std::conj(v[i]) * dv[node]).imag();
    const double ur2 = std::norm(dv[node] - v[i] / r);  // r^2 |u_r|^2
    fr += 4.0 * w.d2w[node] * ur2 - a * u2 * w.lap[node] + (4.0 / 3.0) * a * u2 * u2 * w.lap[node] -
          w.bilap[node] * a;
  }
  d.mass = wt * m;
  d.grad_sq = grad_sq_v(sp, std::vector<cplx>(v.begin(), v.end()));
  const double L4 = wt * l4, L6 = wt * l6;
  d.energy = 0.5 * d.grad_sq - 0.25 * L4 + L6 / 6.0;
  d.virial = d.grad_sq + L6 - 0.75 * L4;
  d.l4 = std::pow(L4, 0.25);
  d.PR = 2.0 * wt * pr;
  d.FR = wt * fr;
  if (!P.empty()) {
    cplx c(0.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double r = g.r(i + 1);
      c += r * P[i + 1] * v[i];
      dev += std::pow(std::abs(v[i]) - r * P[i + 1], 2);
    }
    const cplx ph = std::abs(c) > 0.0 ? c / std::abs(c) : cplx(1.0);
    std::vector<cplx> diff(N);
    for (std::size_t i = 0; i < N; ++i) diff[i] = v[i] - ph * g.r(i + 1) * P[i + 1];
    d.h1dist = std::sqrt(h1_sq(sp, std::move(diff)));
    d.absdev = std::sqrt(wt * dev);
  }
  return d;
}

Trajectory evolve(const RadialField& u0, const EvolutionConfig& cfg, const SolitonProfile* profile) {
  const RadialGrid& grid = u0.grid();
  validate(cfg, grid);
  const InteriorSpectral sp(grid);
  const std::size_t N = sp.size();
  const auto weight = virial_weight(cfg.virial_R, grid);
  const std::vector<double> P = profile ? sample_profile(*profile, grid) : std::vector<double>{};

  const double span = cfg.t_end - cfg.t_start;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / cfg.dt - 1e-9)));
  const double tau = span / static_cast<double>(steps);

  std::vector<cplx> half(N);
  for (std::size_t m = 0; m < N; ++m) half[m] = std::polar(1.0, -sp.wavenumbers()[m] * sp.wavenumbers()[m] * 0.5 * tau);
  std::vector<double> damp(N, 1.0);
  if (cfg.layer_width > 0.0) {
    const double start = grid.r_max() - cfg.layer_width;
    for (std::size_t i = 0; i < N; ++i) {
      const double r = grid.r(i + 1);
      if (r > start) {
        const double s = (r - start) / cfg.layer_width;
        damp[i] = std::exp(-cfg.layer_strength * s * s * std::abs(tau));
      }
    }
  }

  auto v = sp.to_v(u0);
  Trajectory traj{grid, {}, {}, {}, RadialField::zeros(grid, false), cfg.t_start};
  std::size_t records = 0;
  auto record = [&](double t) {
    for (const auto& x : v) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw Error(ErrorKind::no_convergence, "non-finite state at t=" + format_double(t) +
                                                   "; last good time " + format_double(traj.last_good_time));
      }
    }
    traj.rows.push_back(diagnose(sp, v, t, weight, P));
    if (cfg.snapshot_every > 0 && records % cfg.snapshot_every == 0) {
      traj.snapshot_times.push_back(t);
      traj.snapshots.push_back(sp.field_from_v(std::span<const cplx>(v)));
    }
    ++records;
    traj.last_good_time = t;
  };

  record(cfg.t_start);
  const auto& S = sp.transform();
  for (std::size_t s = 1; s <= steps; ++s) {
    S.apply(std::span<cplx>(v));
    for (std::size_t m = 0; m < N; ++m) v[m] *= half[m];
    S.apply(std::span<cplx>(v));
    for (std::size_t i = 0; i < N; ++i) {
      if (cfg.nonlinear) {
        const double r = grid.r(i + 1);
        const double a = std::norm(v[i]) / (r * r);
        v[i] *= std::polar(damp[i], tau * (a - a * a));
      } else {
        v[i] *= damp[i];
      }
    }
    S.apply(std::span<cplx>(v));
    for (std::size_t m = 0; m < N; ++m) v[m] *= half[m];
    S.apply(std::span<cplx>(v));
    if (s % cfg.record_every == 0 || s == steps) {
      record(s == steps ? cfg.t_end : cfg.t_start + static_cast<double>(s) * tau);
    }
  }
  traj.final_state = sp.field_from_v(std::span<const cplx>(v));
  return traj;
}

ModulationPoint modulation_fit(const RadialField& u, double t, const SolitonProfile& profile, double tube) {
  const auto& grid = u.grid();
  const InteriorSpectral sp(grid);
  const std::size_t N = sp.size();
  const double wt = sp.weight();
  const auto P = sample_profile(profile, grid);
  const double omega = profile.omega;
  const cplx rot = std::polar(1.0, -omega * t);
  auto v = sp.to_v(u);
  for (auto& x : v) x *= rot;

  std::vector<double> vP(N), LY(N);
  cplx c(0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double r = grid.r(i + 1), p = P[i + 1];
    vP[i] = r * p;
    LY[i] = r * (-2.0 * omega * p - p * p * p + 4.0 * std::pow(p, 5));
    c += vP[i] * v[i];
  }
  if (!(std::abs(c) > 0.0)) throw Error(ErrorKind::no_decomposition, "u is orthogonal to P");
  ModulationPoint mp{std::arg(c), 0.0, RadialField::zeros(grid, false), 0.0, 0.0, 0.0, 0.0};
  const cplx back = std::polar(1.0, -mp.theta);
  for (auto& x : v) x *= back;

  std::vector<cplx> diff(N);
  for (std::size_t i = 0; i < N; ++i) diff[i] = v[i] - vP[i];
  const double dist = std::sqrt(h1_sq(sp, diff));
  const double pnorm = std::sqrt(profile.norms.grad_sq + profile.norms.mass);
  if (!(dist <= tube * pnorm)) {
    throw Error(ErrorKind::no_decomposition, "u is outside the modulation tube (distance " + format_double(dist) +
                                                 ", tube " + format_double(tube * pnorm) + ")");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < N; ++i) num += LY[i] * v[i].real();
  num *= wt;
  mp.alpha = num / (2.0 * (profile.beta - 1.0) * profile.norms.grad_sq) - 1.0;

  std::vector<cplx> h(N);
  cplx hp(0.0);
  double hy = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    h[i] = v[i] - (1.0 + mp.alpha) * vP[i];
    hp += vP[i] * h[i];
    hy += LY[i] * h[i].real();
  }
  mp.residual_phase = std::abs(wt * hp.imag());
  mp.residual_scaling = std::abs(wt * hy);
  mp.h_h1 = std::sqrt(h1_sq(sp, h));
  mp.h = sp.field_from_v(std::span<const cplx>(h));
  const auto w = virial_weight(kInfiniteRadius, grid);
  mp.delta = std::abs(diagnose(sp, sp.to_v(u), t, w, {}).virial);
  return mp;
}

double virial_identity_check(const Trajectory& traj, std::size_t begin, std::size_t end) {
  const auto& rows = traj.rows;
  if (end == 0 || end > rows.size()) end = rows.size();
  begin = std::max<std::size_t>(begin, 1);
  double dev = 0.0;
  for (std::size_t i = begin; i + 1 < end; ++i) {
    const double dP = (rows[i + 1].PR - rows[i - 1].PR) / (rows[i + 1].t - rows[i - 1].t);
    dev = std::max(dev, std::abs(dP - rows[i].FR));
  }
  return dev;
}

RateFit convergence_rate(const Trajectory& traj, const SolitonProfile& profile, double tube) {
  const double pnorm = std::sqrt(profile.norms.grad_sq + profile.norms.mass);
  const auto& rows = traj.rows;
  RateFit f;
  std::size_t end = 0;
  while (end < rows.size() && rows[end].h1dist <= tube * pnorm) ++end;
  if (end < rows.size()) f.exit_time = rows[end].t;
  f.end = end;
  double dmax = 0.0;
  for (std::size_t i = 0; i < end; ++i) dmax = std::max(dmax, rows[i].h1dist);
  if (end < 3 || dmax < 1e-9 * pnorm) {
    f.degenerate = true;
    return f;
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < end; ++i) {
    const double y = std::log(rows[i].h1dist);
    st += rows[i].t;
    sy += y;
    stt += rows[i].t * rows[i].t;
    sty += rows[i].t * y;
  }
  const double n = static_cast<double>(end);
  f.slope = (n * sty - st * sy) / (n * stt - st * st);
  f.intercept = (sy - f.slope * st) / n;
  f.rate = std::abs(f.slope);
  return f;
}

Verdict scattering_indicator(const Trajectory& traj, const SolitonProfile* profile) {
  const auto& rows = traj.rows;
  if (rows.size() < 3 || std::abs(rows.back().t - rows.front().t) < 20.0) {
    throw Error(ErrorKind::precondition_violated, "scattering indicator needs a trajectory of duration >= 20");
  }
  Verdict v;
  v.note = "finite-time indicator: scattering is an asymptotic statement and is not decided by a finite run";
  double lmax = 0.0;
  v.min_virial = rows.front().virial;
  for (const auto& r : rows) {
    lmax = std::max(lmax, r.l4);
    v.min_virial = std::min(v.min_virial, r.virial);
  }
  v.virial_positive = v.min_virial > 0.0;
  v.l4_drop = rows.back().l4 > 0.0 ? lmax / rows.back().l4 : std::numeric_limits<double>::infinity();
  // Log-log slope of ||u||_4^4 against elapsed time over the last third.
  const double t0 = rows.front().t;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 2 * rows.size() / 3; i < rows.size(); ++i) {
    const double el = std::abs(rows[i].t - t0);
    if (el <= 0.0 || rows[i].l4 <= 0.0) continue;
    const double x = std::log(el), y = 4.0 * std::log(rows[i].l4);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  v.l4_loglog_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
  if (profile) {
    const double pnorm = std::sqrt(profile->norms.grad_sq + profile->norms.mass);
    for (const auto& r : rows) v.max_rel_dist = std::max(v.max_rel_dist, r.h1dist / pnorm);
  }
  if (v.l4_loglog_slope <= -0.5 && v.l4_drop >= 10.0) {
    v.verdict = "dispersing";
  } else if (profile && v.max_rel_dist <= 1e-3) {
    v.verdict = "soliton-locked";
  } else {
    v.verdict = "undetermined";
  }
  return v;
}

GradientComparison gradient_comparison(const Trajectory& traj, const SolitonProfile& profile) {
  const InteriorSpectral sp(traj.grid);
  const auto P = sample_profile(profile, traj.grid);
  std::vector<cplx> vP(sp.size());
  for (std::size_t i = 0; i < vP.size(); ++i) vP[i] = traj.grid.r(i + 1) * P[i + 1];
  const double G = grad_sq_v(sp, vP);
  GradientComparison gc;
  for (const auto& r : traj.rows) {
    gc.t.push_back(r.t);
    gc.diff.push_back(r.grad_sq - G);
  }
  gc.all_negative = std::all_of(gc.diff.begin(), gc.diff.end(), [](double d) { return d < 0.0; });
  gc.all_positive = std::all_of(gc.diff.begin(), gc.diff.end(), [](double d) { return d > 0.0; });
  for (std::size_t i = 1; i < gc.diff.size(); ++i) {
    if ((gc.diff[i] < 0.0) != (gc.diff[i - 1] < 0.0)) ++gc.sign_changes;
  }
  return gc;
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,mass,energy,virial,PR,l4,h1dist,grad_sq,FR,absdev\n";
  for (const auto& r : traj.rows) {
    os << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.energy) << ','
       << format_double(r.virial) << ',' << format_double(r.PR) << ',' << format_double(r.l4) << ','
       << format_double(r.h1dist) << ',' << format_double(r.grad_sq) << ',' << format_double(r.FR) << ','
       << format_double(r.absdev) << '\n';
  }
  return os.str();
}

std::string verdict_json(const Verdict& v) {
  std::ostringstream os;
  os << "{\"verdict\": \"" << v.verdict << "\", \"l4_loglog_slope\": " << format_double(v.l4_loglog_slope)
     << ", \"l4_drop\": " << format_double(v.l4_drop) << ", \"min_virial\": " << format_double(v.min_virial)
     << ", \"virial_positive\": " << (v.virial_positive ? "true" : "false")
     << ", \"max_rel_dist\": " << format_double(v.max_rel_dist) << ", \"note\": \"" << v.note << "\"}\n";
  return os.str();
}

}  // namespace cqnls
