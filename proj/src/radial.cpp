#include "cqnls/radial.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"

namespace cqnls {

RadialGrid::RadialGrid(double r_max, std::size_t n) : r_max_(r_max), n_(n), h_(0.0) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw Error(ErrorKind::invalid_argument, "r_max must be positive and finite");
  }
  if (n < kMinGridPoints) {
    throw Error(ErrorKind::invalid_argument, "grid needs at least " + std::to_string(kMinGridPoints) + " points");
  }
  h_ = r_max / static_cast<double>(n - 1);
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(n_);
  for (std::size_t i = 0; i < n_; ++i) r[i] = this->r(i);
  return r;
}

RadialGrid make_grid(double r_max, std::size_t n) { return RadialGrid(r_max, n); }

RadialField::RadialField(const RadialGrid& grid, std::vector<cplx> values, bool real, Parity parity)
    : grid_(grid), values_(std::move(values)), real_(real), parity_(parity) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::invalid_field, "sample count " + std::to_string(values_.size()) + " does not match grid size " +
                                              std::to_string(grid_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
      throw Error(ErrorKind::invalid_field, "non-finite sample at node " + std::to_string(i));
    }
  }
}

RadialField RadialField::real(const RadialGrid& grid, std::vector<double> values, Parity parity) {
  std::vector<cplx> c(values.begin(), values.end());
  return RadialField(grid, std::move(c), true, parity);
}

RadialField RadialField::complex(const RadialGrid& grid, std::vector<cplx> values, Parity parity) {
  return RadialField(grid, std::move(values), false, parity);
}

RadialField RadialField::zeros(const RadialGrid& grid, bool real) {
  return RadialField(grid, std::vector<cplx>(grid.size()), real, Parity::even);
}

std::vector<double> RadialField::real_part() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i].real();
  return out;
}

std::vector<double> RadialField::imag_part() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i].imag();
  return out;
}

RadialField RadialField::conj() const {
  std::vector<cplx> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::conj(values_[i]);
  return RadialField(grid_, std::move(out), real_, parity_);
}

RadialField RadialField::scaled(cplx factor) const {
  std::vector<cplx> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * values_[i];
  const bool stays_real = real_ && factor.imag() == 0.0;
  if (stays_real) {
    for (auto& v : out) v = cplx(v.real(), 0.0);
  }
  return RadialField(grid_, std::move(out), stays_real, parity_);
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!(a == b)) throw Error(ErrorKind::invalid_argument, "fields live on different grids");
}

namespace {

RadialField combine(const RadialField& a, const RadialField& b, double sign) {
  require_same_grid(a.grid(), b.grid());
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + sign * b[i];
  if (a.is_real() && b.is_real()) {
    std::vector<double> re(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
    return RadialField::real(a.grid(), std::move(re), a.parity());
  }
  return RadialField::complex(a.grid(), std::move(out), a.parity());
}

}  // namespace

RadialField operator+(const RadialField& a, const RadialField& b) { return combine(a, b, 1.0); }
RadialField operator-(const RadialField& a, const RadialField& b) { return combine(a, b, -1.0); }

std::vector<double> measure_weights(const RadialGrid& grid) {
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    w[i] = 4.0 * kPi * h * r * r;
  }
  w[n - 1] *= 0.5;
  return w;
}

namespace {

// Composite Simpson on an arbitrary point count; an odd number of intervals
// finishes with a 3/8 panel.
double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  const std::size_t intervals = n - 1;
  std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (simpson_end != intervals) {
    const std::size_t i = simpson_end;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

double weighted_sum(const std::vector<double>& w, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * g[i];
  return s;
}

}  // namespace

double radial_integral(const RadialField& f, int power) {
  if (power != 0 && power != 2) throw Error(ErrorKind::invalid_argument, "power must be 0 or 2");
  if (!f.is_real()) {
    // Integrate the real part; an imaginary remainder is a caller bug only if
    // they expected a real result, so report it rather than dropping it.
    for (cplx v : f.values()) {
      if (v.imag() != 0.0) throw Error(ErrorKind::invalid_field, "radial_integral expects a real-valued field");
    }
  }
  const auto re = f.real_part();
  if (power == 0) return simpson(re, f.grid().spacing());
  return weighted_sum(measure_weights(f.grid()), re);
}

cplx inner(const RadialField& f, const RadialField& g) {
  require_same_grid(f.grid(), g.grid());
  const auto w = measure_weights(f.grid());
  cplx s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i] * std::conj(g[i]);
  return s;
}

double dot(const RadialField& f, const RadialField& g) { return inner(f, g).real(); }

std::vector<cplx> radial_derivative(const RadialField& u) {
  const std::size_t n = u.size();
  const double h = u.grid().spacing();
  const double sgn = u.parity() == Parity::even ? 1.0 : -1.0;
  auto at = [&](std::ptrdiff_t i) -> cplx { return i < 0 ? sgn * u[static_cast<std::size_t>(-i)] : u[static_cast<std::size_t>(i)]; };
  std::vector<cplx> d(n);
  const double c = 1.0 / (12.0 * h);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const auto i = static_cast<std::ptrdiff_t>(k);
    d[k] = c * (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2));
  }
  {
    const auto i = static_cast<std::ptrdiff_t>(n - 2);
    d[n - 2] = c * (3.0 * at(i + 1) + 10.0 * at(i) - 18.0 * at(i - 1) + 6.0 * at(i - 2) - at(i - 3));
  }
  {
    const auto i = static_cast<std::ptrdiff_t>(n - 1);
    d[n - 1] = c * (25.0 * at(i) - 48.0 * at(i - 1) + 36.0 * at(i - 2) - 16.0 * at(i - 3) + 3.0 * at(i - 4));
  }
  if (u.parity() == Parity::even) d[0] = 0.0;
  return d;
}

std::vector<cplx> radial_laplacian(const RadialField& u) {
  const std::size_t n = u.size();
  const double h = u.grid().spacing();
  const double sgn = u.parity() == Parity::even ? 1.0 : -1.0;
  auto at = [&](std::ptrdiff_t i) -> cplx { return i < 0 ? sgn * u[static_cast<std::size_t>(-i)] : u[static_cast<std::size_t>(i)]; };
  const auto d1 = radial_derivative(u);
  std::vector<cplx> lap(n);
  const double c = 1.0 / (12.0 * h * h);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const auto i = static_cast<std::ptrdiff_t>(k);
    const cplx d2 = c * (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2));
    lap[k] = k == 0 ? 3.0 * d2 : d2 + 2.0 * d1[k] / u.grid().r(k);
  }
  // One-sided second derivatives (fourth order, six points) at the outer edge.
  for (std::size_t k = n - 2; k < n; ++k) {
    const auto i = static_cast<std::ptrdiff_t>(k);
    cplx d2;
    if (k == n - 1) {
      d2 = c * (45.0 * at(i) - 154.0 * at(i - 1) + 214.0 * at(i - 2) - 156.0 * at(i - 3) + 61.0 * at(i - 4) -
                10.0 * at(i - 5));
    } else {
      d2 = c * (10.0 * at(i + 1) - 15.0 * at(i) - 4.0 * at(i - 1) + 14.0 * at(i - 2) - 6.0 * at(i - 3) + at(i - 4));
    }
    lap[k] = d2 + 2.0 * d1[k] / u.grid().r(k);
  }
  return lap;
}

NormIntegrals norm_integrals(const RadialField& u) {
  const auto w = measure_weights(u.grid());
  const auto d = radial_derivative(u);
  NormIntegrals out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a2 = std::norm(u[i]);
    out.mass += w[i] * a2;
    out.grad_sq += w[i] * std::norm(d[i]);
    out.l4_4 += w[i] * a2 * a2;
    out.l6_6 += w[i] * a2 * a2 * a2;
  }
  return out;
}

double energy_of(const NormIntegrals& n) { return 0.5 * n.grad_sq - 0.25 * n.l4_4 + n.l6_6 / 6.0; }
double virial_of(const NormIntegrals& n) { return n.grad_sq + n.l6_6 - 0.75 * n.l4_4; }

FunctionalReport functionals(const RadialField& u) {
  const auto n = norm_integrals(u);
  FunctionalReport rep;
  rep.mass = n.mass;
  rep.energy = energy_of(n);
  rep.virial = virial_of(n);
  rep.l2 = std::sqrt(n.mass);
  rep.h1dot = std::sqrt(n.grad_sq);
  rep.l4 = std::pow(n.l4_4, 0.25);
  rep.l6 = std::pow(n.l6_6, 1.0 / 6.0);
  // Each Cartesian component of Im(conj(u) grad u) is odd in x for radial u.
  rep.momentum = {0.0, 0.0, 0.0};
  return rep;
}

namespace {

// S(x) = x^5 (126 - 420x + 540x^2 - 315x^3 + 70x^4): C^4 step from 0 to 1 on [0, 1].
constexpr double kStep[10] = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

double step_poly(double x, int derivative) {
  double s = 0.0;
  for (int p = 9; p >= derivative; --p) {
    double c = kStep[p];
    for (int k = 0; k < derivative; ++k) c *= (p - k);
    s = s * x + c;
  }
  return s;
}

}  // namespace

double cutoff_chi(double s, int derivative) {
  if (s <= 1.0) return derivative == 0 ? 1.0 : 0.0;
  if (s >= 2.0) return 0.0;
  const double v = step_poly(s - 1.0, derivative);
  return derivative == 0 ? 1.0 - v : -v;
}

double cutoff_phi(double s) {
  // phi(s) = s^2 - int_0^{s-1} 2(x+1) S(x) dx for s in [1, 2].
  auto tail = [](double y) {
    double acc = 0.0;
    for (int p = 5; p <= 9; ++p) {
      acc += 2.0 * kStep[p] * (std::pow(y, p + 2) / (p + 2) + std::pow(y, p + 1) / (p + 1));
    }
    return acc;
  };
  const double t = std::min(std::max(s, 0.0), 2.0);
  if (t <= 1.0) return t * t;
  return t * t - tail(t - 1.0);
}

VirialWeight virial_weight(double R, const RadialGrid& grid) {
  if (std::isnan(R) || R < 1.0) throw Error(ErrorKind::invalid_argument, "virial radius must be >= 1 or infinite");
  const std::size_t n = grid.size();
  VirialWeight vw{grid, R, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n), std::vector<double>(n)};
  const bool inf = R == kInfiniteRadius;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    if (inf || r <= R) {
      vw.w[i] = r * r;
      vw.dw[i] = 2.0 * r;
      vw.d2w[i] = 2.0;
      vw.lap[i] = 6.0;
      vw.bilap[i] = 0.0;
      continue;
    }
    const double rho = r / R;
    const double c0 = cutoff_chi(rho, 0), c1 = cutoff_chi(rho, 1), c2 = cutoff_chi(rho, 2), c3 = cutoff_chi(rho, 3);
    vw.w[i] = R * R * cutoff_phi(rho);
    vw.dw[i] = 2.0 * r * c0;
    vw.d2w[i] = 2.0 * c0 + 2.0 * rho * c1;
    vw.lap[i] = 6.0 * c0 + 2.0 * rho * c1;
    vw.bilap[i] = (14.0 * c2 + 2.0 * rho * c3 + 16.0 * c1 / rho) / (R * R);
  }
  return vw;
}

double localized_virial_F(const RadialField& u, const VirialWeight& w) {
  require_same_grid(u.grid(), w.grid);
  const auto mw = measure_weights(u.grid());
  const auto d = radial_derivative(u);
  double s = 0.0;
  for (std::size_t i = 0; i < mw.size(); ++i) {
    const double a2 = std::norm(u[i]);
    s += mw[i] * (4.0 * std::norm(d[i]) * w.d2w[i] - a2 * a2 * w.lap[i] + (4.0 / 3.0) * a2 * a2 * a2 * w.lap[i] -
                  w.bilap[i] * a2);
  }
  return s;
}

double localized_virial_P(const RadialField& u, const VirialWeight& w) {
  require_same_grid(u.grid(), w.grid);
  if (u.is_real()) return 0.0;
  const auto mw = measure_weights(u.grid());
  const auto d = radial_derivative(u);
  double s = 0.0;
  for (std::size_t i = 0; i < mw.size(); ++i) s += mw[i] * (std::conj(u[i]) * d[i]).imag() * w.dw[i];
  return 2.0 * s;
}

void write_field(std::ostream& os, const RadialField& f) {
  const auto& g = f.grid();
  os << "# r_max=" << format_double(g.r_max()) << " n=" << g.size() << "\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << format_double(g.r(i)) << ' ' << format_double(f[i].real()) << ' ' << format_double(f[i].imag()) << '\n';
  }
  if (!os) throw Error(ErrorKind::io, "failed writing field");
}

RadialField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::io, "empty field stream");
  double r_max = 0.0;
  std::size_t n = 0;
  {
    const auto a = line.find("r_max=");
    const auto b = line.find("n=", a == std::string::npos ? 0 : a + 6);
    if (line.rfind("#", 0) != 0 || a == std::string::npos || b == std::string::npos) {
      throw Error(ErrorKind::invalid_field, "missing '# r_max=.. n=..' header");
    }
    const auto a_end = line.find(' ', a);
    r_max = parse_double(line.substr(a + 6, a_end - (a + 6)));
    try {
      n = std::stoul(line.substr(b + 2));
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_field, "bad point count in header");
    }
  }
  const RadialGrid grid(r_max, n);
  std::vector<cplx> values;
  values.reserve(n);
  bool any_imag = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string sr, sre, sim;
    if (!(ls >> sr >> sre >> sim)) throw Error(ErrorKind::invalid_field, "malformed row: " + line);
    const cplx v(parse_double(sre), parse_double(sim));
    any_imag = any_imag || v.imag() != 0.0;
    values.push_back(v);
  }
  if (values.size() != n) throw Error(ErrorKind::invalid_field, "row count does not match header");
  if (!any_imag) {
    std::vector<double> re(n);
    for (std::size_t i = 0; i < n; ++i) re[i] = values[i].real();
    return RadialField::real(grid, std::move(re));
  }
  return RadialField::complex(grid, std::move(values));
}

}  // namespace cqnls
