#include "cqnls/groundstate.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"

namespace cqnls {

namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;

struct Rhs {
  double omega;
  void operator()(const State& x, State& dx, double r) const {
    const double p = x[0];
    const double p2 = p * p;
    dx[0] = x[1];
    dx[1] = p * (omega - p2 + p2 * p2) - 2.0 * x[1] / r;
  }
};

State seed(double omega, double p0, double r) {
  const double a = p0 * (omega - p0 * p0 + p0 * p0 * p0 * p0);
  return {p0 + a * r * r / 6.0, a * r / 3.0};
}

enum class Shot { under, over };

// Overshoot: P crosses zero, or P' turns positive while P sits above the
// local maximum of the effective potential (the trajectory escapes upward).
std::optional<Shot> event(const State& x) {
  if (x[0] < 0.0) return Shot::over;
  if (x[1] > 0.0) return x[0] * x[0] > 0.5 ? Shot::over : Shot::under;
  return std::nullopt;
}

Shot classify(double omega, double p0, const ShootingOptions& opts, double r_limit) {
  auto stepper = ode::make_dense_output(opts.ode_tolerance, opts.ode_tolerance, ode::runge_kutta_dopri5<State>());
  stepper.initialize(seed(omega, p0, opts.r_seed), opts.r_seed, 1e-3);
  const Rhs rhs{omega};
  while (stepper.current_time() < r_limit) {
    stepper.do_step(rhs);
    if (auto e = event(stepper.current_state())) return *e;
  }
  return Shot::under;
}

struct Trace {
  std::vector<double> p, q;
  std::size_t valid = 0;  // radii [0, valid) are filled
};

// Integrates from the origin and samples at the given increasing radii
// (radii[0] = 0), stopping at the first classification event.
Trace trace(double omega, double p0, const std::vector<double>& radii, const ShootingOptions& opts) {
  const std::size_t n = radii.size();
  Trace t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 1};
  t.p[0] = p0;
  auto stepper = ode::make_dense_output(opts.ode_tolerance, opts.ode_tolerance, ode::runge_kutta_dopri5<State>());
  stepper.initialize(seed(omega, p0, opts.r_seed), opts.r_seed, 1e-3);
  const Rhs rhs{omega};
  std::size_t next = 1;
  while (next < n) {
    stepper.do_step(rhs);
    State x;
    while (next < n && radii[next] <= stepper.current_time()) {
      stepper.calc_state(radii[next], x);
      t.p[next] = x[0];
      t.q[next] = x[1];
      ++next;
    }
    t.valid = next;
    if (event(stepper.current_state())) break;
  }
  return t;
}

// Multiple shooting on [r_seed, a_K] with a decaying-tail condition at a_K.
// Unknowns: P(0) and the states at the interior segment starts. Each
// segment is short enough that the saddle near P_+ amplifies errors by at
// most e per segment, so Newton stays well conditioned where plain
// shooting from the origin cannot resolve P(0) in double precision.
struct MultiShoot {
  double omega;
  std::vector<double> starts;  // a_0 = r_seed < a_1 < ... < a_{K-1}; end a_K
  double end;
  double p0;
  std::vector<State> nodes;  // states at a_1..a_{K-1}
};

using Aug = std::array<double, 6>;  // P, Q, then the 2x2 sensitivity column-major

struct AugRhs {
  double omega;
  void operator()(const Aug& x, Aug& dx, double r) const {
    const double p = x[0], p2 = p * p;
    dx[0] = x[1];
    dx[1] = p * (omega - p2 + p2 * p2) - 2.0 * x[1] / r;
    const double j = omega - 3.0 * p2 + 5.0 * p2 * p2;
    for (int c = 0; c < 2; ++c) {
      const double a = x[2 + 2 * c], b = x[3 + 2 * c];
      dx[2 + 2 * c] = b;
      dx[3 + 2 * c] = j * a - 2.0 * b / r;
    }
  }
};

Aug flow(double omega, const State& s, double r0, double r1, double tol) {
  Aug x{s[0], s[1], 1.0, 0.0, 0.0, 1.0};
  ode::integrate_adaptive(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<Aug>()), AugRhs{omega}, x, r0, r1,
                          (r1 - r0) / 8.0);
  return x;
}

Eigen::VectorXd pack(const MultiShoot& m) {
  Eigen::VectorXd x(2 * m.starts.size() - 1);
  x(0) = m.p0;
  for (std::size_t s = 0; s < m.nodes.size(); ++s) {
    x(1 + 2 * s) = m.nodes[s][0];
    x(2 + 2 * s) = m.nodes[s][1];
  }
  return x;
}

void unpack(MultiShoot& m, const Eigen::VectorXd& x) {
  m.p0 = x(0);
  for (std::size_t s = 0; s < m.nodes.size(); ++s) m.nodes[s] = {x(1 + 2 * s), x(2 + 2 * s)};
}

// Continuity defects between segments and the tail condition
// P'(a_K) + (sqrt(omega) + 1/a_K) P(a_K) = 0.
Eigen::VectorXd ms_residual(const MultiShoot& m, Eigen::MatrixXd* jac, double tol) {
  const std::size_t K = m.starts.size();
  const std::size_t dim = 2 * K - 1;
  const double k = std::sqrt(m.omega);
  Eigen::VectorXd f(dim);
  if (jac) jac->setZero(dim, dim);
  for (std::size_t s = 0; s < K; ++s) {
    const double b = s + 1 < K ? m.starts[s + 1] : m.end;
    const State x0 = s == 0 ? seed(m.omega, m.p0, m.starts[0]) : m.nodes[s - 1];
    const Aug y = flow(m.omega, x0, m.starts[s], b, tol);
    Eigen::Matrix2d phi;
    phi << y[2], y[4], y[3], y[5];
    Eigen::Matrix<double, 2, Eigen::Dynamic> d;
    std::size_t col = 0;
    if (s == 0) {
      const double r = m.starts[0], p0 = m.p0;
      const double da = m.omega - 3.0 * p0 * p0 + 5.0 * p0 * p0 * p0 * p0;
      d = phi * Eigen::Vector2d(1.0 + da * r * r / 6.0, da * r / 3.0);
    } else {
      d = phi;
      col = 1 + 2 * (s - 1);
    }
    if (s + 1 < K) {
      const std::size_t row = 2 * s;
      f(row) = y[0] - m.nodes[s][0];
      f(row + 1) = y[1] - m.nodes[s][1];
      if (jac) {
        jac->block(row, col, 2, d.cols()) = d;
        jac->block(row, 1 + 2 * s, 2, 2) = -Eigen::Matrix2d::Identity();
      }
    } else {
      const double c = k + 1.0 / m.end;
      f(dim - 1) = y[1] + c * y[0];
      if (jac) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) (*jac)(dim - 1, col + j) = d(1, j) + c * d(0, j);
      }
    }
  }
  return f;
}

bool refine(MultiShoot& ms, double tol, int max_iter = 12) {
  Eigen::MatrixXd jac;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd f = ms_residual(ms, &jac, tol);
    const double fn = f.norm();
    if (!std::isfinite(fn)) return false;
    if (fn < 1e-12) return true;
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 6; ++ls, t *= 0.5) {
      MultiShoot trial = ms;
      unpack(trial, pack(ms) + t * dx);
      const double ft = ms_residual(trial, nullptr, tol).norm();
      if (std::isfinite(ft) && ft < (1.0 - 1e-4 * t) * fn) {
        ms = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) return fn < 1e-10;
    if (dx.lpNorm<Eigen::Infinity>() * t < 1e-14) return true;
  }
  return ms_residual(ms, nullptr, tol).norm() < 1e-10;
}

// d(unknowns)/d(omega) along the solution branch.
Eigen::VectorXd tangent(const MultiShoot& ms, double tol) {
  Eigen::MatrixXd jac;
  const Eigen::VectorXd f0 = ms_residual(ms, &jac, tol);
  MultiShoot shifted = ms;
  const double eps = 1e-7;
  shifted.omega += eps;
  const Eigen::VectorXd f1 = ms_residual(shifted, nullptr, tol);
  return jac.partialPivLu().solve(-(f1 - f0) / eps);
}

double hermite5(double h, double s, double p0, double d0, double s0, double p1, double d1, double s1) {
  // Quintic Hermite on [0, h] with values, slopes and second derivatives at both ends.
  const double t = s / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
  return h00 * p0 + h10 * h * d0 + h20 * h * h * s0 + h01 * p1 + h11 * h * d1 + h21 * h * h * s1;
}

double second_derivative(double omega, double p, double q, double r) {
  const double f = p * (omega - p * p + p * p * p * p);
  return r == 0.0 ? f / 3.0 : f - 2.0 * q / r;
}

void check_omega(double omega) {
  if (!(omega > 0.0 && omega < kOmegaMax)) {
    throw Error(ErrorKind::out_of_range, "omega must lie in (0, 3/16), got " + format_double(omega));
  }
}

}  // namespace

double SolitonProfile::value_at(double r) const {
  r = std::abs(r);
  const double k = std::sqrt(omega);
  if (r >= match_radius) return tail_amplitude * std::exp(-k * r) / r;
  const auto& g = field.grid();
  const double h = g.spacing();
  auto i = static_cast<std::size_t>(r / h);
  i = std::min(i, g.size() - 2);
  const double r0 = g.r(i), r1 = g.r(i + 1);
  const double p0 = field[i].real(), p1 = field[i + 1].real();
  const double d0 = derivative[i], d1 = derivative[i + 1];
  return hermite5(r1 - r0, r - r0, p0, d0, second_derivative(omega, p0, d0, r0), p1, d1,
                  second_derivative(omega, p1, d1, r1));
}

double SolitonProfile::derivative_at(double r) const {
  const double sign = r < 0.0 ? -1.0 : 1.0;
  r = std::abs(r);
  const double k = std::sqrt(omega);
  if (r >= match_radius) return sign * -tail_amplitude * std::exp(-k * r) * (k * r + 1.0) / (r * r);
  // Differentiate the Hermite interpolant numerically; only used for resampling.
  const double e = 1e-5;
  const double lo = std::max(r - e, 0.0);
  return sign * (value_at(r + e) - value_at(lo)) / (r + e - lo);
}

SolitonProfile profile_from_field(double omega, const RadialField& field) {
  if (!field.is_real()) throw Error(ErrorKind::invalid_profile, "soliton profile must be real");
  const auto norms = norm_integrals(field);
  if (!(norms.grad_sq > 0.0)) throw Error(ErrorKind::invalid_profile, "profile has zero gradient");
  const auto d = radial_derivative(field);
  std::vector<double> dr(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) dr[i] = d[i].real();
  return SolitonProfile{omega,
                        field,
                        std::move(dr),
                        field[0].real(),
                        functionals(field),
                        norms,
                        norms.l6_6 / norms.grad_sq,
                        field.grid().r_max() * 2.0,
                        0.0};
}

namespace {

struct Bracket {
  double lo, hi;
};

Bracket bisect(double omega, const ShootingOptions& opts) {
  const double r_limit = 80.0 / std::sqrt(omega);
  double lo = std::sqrt(omega);
  double hi = 1.5;
  if (opts.p0_guess) {
    lo = *opts.p0_guess * (1.0 - 1e-3);
    hi = *opts.p0_guess * (1.0 + 1e-3);
  }
  for (int widen = 0; classify(omega, lo, opts, r_limit) != Shot::under; ++widen) {
    if (widen > 60) throw Error(ErrorKind::no_convergence, "no undershooting P(0) found for omega=" + format_double(omega));
    lo *= 0.5;
  }
  for (int widen = 0; classify(omega, hi, opts, r_limit) != Shot::over; ++widen) {
    if (widen > 60) throw Error(ErrorKind::no_convergence, "no overshooting P(0) found for omega=" + format_double(omega));
    hi *= 1.5;
  }
  for (int steps = 0; steps < opts.max_bisections; ++steps) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (classify(omega, mid, opts, r_limit) == Shot::under ? lo : hi) = mid;
  }
  if (hi - lo > 1e-12 * hi) {
    throw Error(ErrorKind::no_convergence, "bisection did not converge for omega=" + format_double(omega));
  }
  return {lo, hi};
}

// Samples of P, P' at radii (radii[0] = 0) with the exact linear tail
// A exp(-k r) / r attached beyond the match radius.
struct Samples {
  double p0 = 0.0;
  std::vector<double> p, q;
  double match_radius = 0.0;
  double amplitude = 0.0;
};

void attach_tail(Samples& s, const std::vector<double>& radii, std::size_t last, double k) {
  s.match_radius = radii[last];
  s.amplitude = s.p[last] * s.match_radius * std::exp(k * s.match_radius);
  for (std::size_t i = last + 1; i < radii.size(); ++i) {
    const double r = radii[i];
    s.p[i] = s.amplitude * std::exp(-k * r) / r;
    s.q[i] = -s.amplitude * std::exp(-k * r) * (k * r + 1.0) / (r * r);
  }
}

// Plain shooting. The two bracketing trajectories agree until round-off in
// P(0) is amplified by the unstable direction; their mean is used up to
// that point. Returns nothing when they separate before P has decayed into
// the linear regime (wide plateau near omega = 3/16).
std::optional<Samples> shoot(double omega, const Bracket& br, const std::vector<double>& radii,
                             const ShootingOptions& opts) {
  const Trace a = trace(omega, br.lo, radii, opts);
  const Trace b = trace(omega, br.hi, radii, opts);
  std::size_t m = 1;
  const std::size_t valid = std::min(a.valid, b.valid);
  while (m < valid) {
    const double mean = 0.5 * (a.p[m] + b.p[m]);
    if (!(mean > 0.0) || std::abs(a.p[m] - b.p[m]) > 1e-7 * mean) break;
    ++m;
  }
  const std::size_t last = m - 1;
  const double p0 = 0.5 * (br.lo + br.hi);
  const double p_last = 0.5 * (a.p[last] + b.p[last]);
  if (m < 8 || (last + 1 < radii.size() && p_last > 1e-3 * p0)) return std::nullopt;
  Samples s{p0, std::vector<double>(radii.size()), std::vector<double>(radii.size()), 0.0, 0.0};
  for (std::size_t i = 0; i <= last; ++i) {
    s.p[i] = 0.5 * (a.p[i] + b.p[i]);
    s.q[i] = 0.5 * (a.q[i] + b.q[i]);
  }
  s.p[0] = p0;
  s.q[0] = 0.0;
  attach_tail(s, radii, last, std::sqrt(omega));
  return s;
}

constexpr double kSegment = 1.0;

// Evaluates a converged multiple-shooting solution at increasing radii.
Samples sample_multishoot(const MultiShoot& ms, const std::vector<double>& radii, double tol) {
  Samples s{ms.p0, std::vector<double>(radii.size()), std::vector<double>(radii.size()), 0.0, 0.0};
  s.p[0] = ms.p0;
  const std::size_t K = ms.starts.size();
  std::size_t i = 1;
  std::size_t last = 0;
  const Rhs rhs{ms.omega};
  for (std::size_t seg = 0; seg < K && i < radii.size(); ++seg) {
    const double a = ms.starts[seg];
    const double b = seg + 1 < K ? ms.starts[seg + 1] : ms.end;
    State x = seg == 0 ? seed(ms.omega, ms.p0, a) : ms.nodes[seg - 1];
    double r = a;
    while (i < radii.size() && radii[i] <= b) {
      ode::integrate_adaptive(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>()), rhs, x, r, radii[i],
                              std::max(radii[i] - r, 1e-6) / 4.0);
      r = radii[i];
      s.p[i] = x[0];
      s.q[i] = x[1];
      last = i;
      ++i;
    }
  }
  attach_tail(s, radii, last, std::sqrt(ms.omega));
  return s;
}

MultiShoot multishoot_from(double omega, const Samples& guess, const std::vector<double>& radii,
                           double p0, double decay) {
  // Segment ends at the first radius where the guess has decayed by `decay`.
  double end = radii.back();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (guess.p[i] < decay * p0) {
      end = radii[i];
      break;
    }
  }
  end = std::max(end, 4.0 * kSegment);
  MultiShoot ms{omega, {}, end, guess.p0, {}};
  ms.starts.push_back(1e-4);
  for (double a = kSegment; a < end - 0.5 * kSegment; a += kSegment) {
    ms.starts.push_back(a);
    // Nearest sample of the guess; radii are dense relative to kSegment.
    const auto it = std::lower_bound(radii.begin(), radii.end(), a);
    const std::size_t j = std::min<std::size_t>(it - radii.begin(), radii.size() - 1);
    ms.nodes.push_back({guess.p[j], guess.q[j]});
  }
  return ms;
}

std::vector<double> fine_radii(double r_end) {
  const double h = 0.01;
  const auto n = static_cast<std::size_t>(std::ceil(r_end / h)) + 1;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(i) * h;
  return r;
}

// Natural continuation in omega from a frequency where plain shooting is
// reliable, refining each step by multiple shooting.
MultiShoot continue_to(double omega, const ShootingOptions& opts) {
  constexpr double kDecay = 1e-6;
  double w0 = omega;
  std::optional<Samples> base;
  std::vector<double> radii;
  for (double d = 0.0025; !base; d *= 2.0) {
    w0 = std::max(omega - d, 0.05);
    radii = fine_radii(80.0 / std::sqrt(w0));
    base = shoot(w0, bisect(w0, opts), radii, opts);
    if (!base && w0 <= 0.05) throw Error(ErrorKind::no_convergence, "no reliable starting frequency for continuation");
  }
  const double tol = opts.ode_tolerance;
  MultiShoot ms = multishoot_from(w0, *base, radii, base->p0, kDecay);
  if (!refine(ms, tol)) throw Error(ErrorKind::no_convergence, "multiple shooting failed at omega=" + format_double(w0));
  double step = std::min(omega - w0, 0.002);
  while (ms.omega < omega) {
    // Keep the tail condition far out: extend the segmentation once the
    // solution at a_K - 20 is no longer negligible.
    const double probe = ms.end - 20.0;
    const auto tail = sample_multishoot(ms, {0.0, probe}, tol);
    if (tail.p[1] > 1e-9 * ms.p0) {
      radii = fine_radii(ms.end + 20.0);
      const Samples prev = sample_multishoot(ms, radii, tol);
      ms = multishoot_from(ms.omega, prev, radii, prev.p0, 0.0);
      if (!refine(ms, tol)) throw Error(ErrorKind::no_convergence, "multiple shooting failed while extending");
    }
    const double w_next = std::min(omega, ms.omega + step);
    const Eigen::VectorXd dir = tangent(ms, tol);
    MultiShoot trial = ms;
    trial.omega = w_next;
    unpack(trial, pack(ms) + (w_next - ms.omega) * dir);
    if (refine(trial, tol)) {
      ms = std::move(trial);
      step *= 1.5;
    } else {
      step *= 0.25;
      if (step < 1e-8) throw Error(ErrorKind::no_convergence, "continuation stalled at omega=" + format_double(ms.omega));
    }
  }
  return ms;
}

}  // namespace

SolitonProfile solve_ground_state(double omega, const RadialGrid& grid, const ShootingOptions& opts) {
  check_omega(omega);
  const auto radii = grid.nodes();
  std::optional<Samples> s;
  try {
    s = shoot(omega, bisect(omega, opts), radii, opts);
  } catch (const Error&) {
    s.reset();
  }
  if (!s) s = sample_multishoot(continue_to(omega, opts), radii, opts.ode_tolerance);
  if (s->p.back() > 1e-2 * s->p0) {
    throw Error(ErrorKind::no_convergence, "profile has not decayed by r_max=" + format_double(grid.r_max()) +
                                               " for omega=" + format_double(omega) + "; enlarge the domain");
  }
  auto field = RadialField::real(grid, std::move(s->p));
  const auto norms = norm_integrals(field);
  return SolitonProfile{omega,      field, std::move(s->q), s->p0, functionals(field), norms, norms.l6_6 / norms.grad_sq,
                        s->match_radius, s->amplitude};
}

double PohozaevReport::max() const { return std::max({mass, l4, l6, energy}); }

PohozaevReport pohozaev_report(const SolitonProfile& p) {
  const auto& n = p.norms;
  const double g = n.grad_sq;
  const double beta = n.l6_6 / g;
  auto rel = [](double lhs, double rhs, double scale) { return std::abs(lhs - rhs) / scale; };
  PohozaevReport r;
  const double m_rhs = (beta + 1.0) / (3.0 * p.omega) * g;
  const double l4_rhs = 4.0 * (beta + 1.0) / 3.0 * g;
  const double e_rhs = (1.0 - beta) / 6.0 * g;
  r.mass = rel(n.mass, m_rhs, std::abs(m_rhs));
  r.l4 = rel(n.l4_4, l4_rhs, std::abs(l4_rhs));
  r.l6 = rel(n.l6_6, beta * g, std::abs(beta * g));
  // E vanishes at beta = 1, so measure it against the gradient term.
  r.energy = rel(energy_of(n), e_rhs, std::max(std::abs(e_rhs), g / 6.0));
  return r;
}

std::array<double, 2> rescaling_constants(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::invalid_profile, "beta must be positive");
  return {std::sqrt((1.0 + beta) / (4.0 * beta)), 3.0 * (1.0 + beta) / (4.0 * std::sqrt(3.0 * beta))};
}

RadialField rescaled_soliton(const SolitonProfile& p) {
  if (p.field.is_real()) {
    bool nonzero = false;
    for (cplx v : p.field.values()) nonzero = nonzero || v.real() != 0.0;
    if (!nonzero) throw Error(ErrorKind::invalid_profile, "zero profile");
  }
  const auto [c, b] = rescaling_constants(p.beta);
  return RadialField::sample_real(p.field.grid(), [&](double r) { return c * p.value_at(b * r); });
}

FamilyRow family_row(const SolitonProfile& p) {
  const auto rep_r = functionals(rescaled_soliton(p));
  return FamilyRow{p.omega, p.report.mass, p.report.energy, p.beta, p.norms.grad_sq, p.p0, rep_r.mass, rep_r.energy};
}

FamilyTable sweep_family(const std::vector<double>& omegas, const RadialGrid& grid, const ShootingOptions& opts) {
  for (double w : omegas) check_omega(w);
  std::vector<double> sorted = omegas;
  std::sort(sorted.begin(), sorted.end());
  FamilyTable table{grid, {}};
  ShootingOptions o = opts;
  for (double w : sorted) {
    SolitonProfile p = [&] {
      try {
        return solve_ground_state(w, grid, o);
      } catch (const Error& e) {
        std::string msg = e.what();
        msg.erase(0, to_string(e.kind()).size() + 2);  // drop the "kind: " prefix
        throw Error(e.kind(), msg + " (sweep at omega=" + format_double(w) + ")");
      }
    }();
    o.p0_guess = p.p0;
    table.rows.push_back(family_row(p));
  }
  return table;
}

std::vector<double> default_omega_grid(std::size_t count, double lo, double hi) {
  check_omega(lo);
  check_omega(hi);
  if (count < 2 || !(lo < hi)) throw Error(ErrorKind::invalid_argument, "need count >= 2 and lo < hi");
  auto logit = [](double w) { return std::log(w / (kOmegaMax - w)); };
  const double a = logit(lo), b = logit(hi);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = kOmegaMax / (1.0 + std::exp(-x));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::string family_csv(const FamilyTable& table) {
  std::ostringstream os;
  os << "omega,mass_P,energy_P,beta,h1dot_P,p0,mass_R,energy_R\n";
  for (const auto& r : table.rows) {
    os << format_double(r.omega) << ',' << format_double(r.mass_P) << ',' << format_double(r.energy_P) << ','
       << format_double(r.beta) << ',' << format_double(r.grad_sq_P) << ',' << format_double(r.p0) << ','
       << format_double(r.mass_R) << ',' << format_double(r.energy_R) << '\n';
  }
  return os.str();
}

}  // namespace cqnls
