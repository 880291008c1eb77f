#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace cqnls {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

/// Uniform grid r_i = i * h on [0, r_max], h = r_max / (n - 1).
///
/// Stores only (r_max, n); nodes are computed on demand so grids are cheap
/// to copy and compare.
class RadialGrid {
 public:
  RadialGrid(double r_max, std::size_t n);

  double r_max() const noexcept { return r_max_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double r(std::size_t i) const noexcept { return i + 1 == n_ ? r_max_ : static_cast<double>(i) * h_; }
  std::vector<double> nodes() const;

  bool operator==(const RadialGrid& other) const noexcept {
    return r_max_ == other.r_max_ && n_ == other.n_;
  }

 private:
  double r_max_;
  std::size_t n_;
  double h_;
};

inline constexpr std::size_t kMinGridPoints = 16;

RadialGrid make_grid(double r_max, std::size_t n);

/// Parity of the extension to r < 0 (radial profiles are even).
enum class Parity { even, odd };

/// Samples u(r_i) of a radially symmetric function on a RadialGrid.
class RadialField {
 public:
  static RadialField real(const RadialGrid& grid, std::vector<double> values, Parity parity = Parity::even);
  static RadialField complex(const RadialGrid& grid, std::vector<cplx> values, Parity parity = Parity::even);
  static RadialField zeros(const RadialGrid& grid, bool real = true);

  template <class F>
  static RadialField sample_real(const RadialGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.r(i));
    return real(grid, std::move(v));
  }

  template <class F>
  static RadialField sample_complex(const RadialGrid& grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.r(i));
    return complex(grid, std::move(v));
  }

  const RadialGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  bool is_real() const noexcept { return real_; }
  Parity parity() const noexcept { return parity_; }

  std::vector<double> real_part() const;
  std::vector<double> imag_part() const;

  RadialField conj() const;
  RadialField scaled(cplx factor) const;

  friend RadialField operator+(const RadialField& a, const RadialField& b);
  friend RadialField operator-(const RadialField& a, const RadialField& b);
  friend RadialField operator*(double s, const RadialField& a) { return a.scaled(s); }
  friend RadialField operator*(cplx s, const RadialField& a) { return a.scaled(s); }

 private:
  RadialField(const RadialGrid& grid, std::vector<cplx> values, bool real, Parity parity);

  RadialGrid grid_;
  std::vector<cplx> values_;
  bool real_;
  Parity parity_;
};

void require_same_grid(const RadialGrid& a, const RadialGrid& b);

/// Quadrature weights of the R^3 radial measure: integral = sum_i w_i f(r_i).
///
/// Trapezoidal weights 4*pi*h*r_i^2 (half weight at r_max). Integrands of
/// smooth radial fields are even in r, so the odd-derivative endpoint terms
/// at r = 0 vanish and the rule converges faster than any power of h on
/// decaying data.
std::vector<double> measure_weights(const RadialGrid& grid);

/// power = 2: 4*pi * int f r^2 dr (the R^3 measure);
/// power = 0: int_0^{r_max} f dr by composite Simpson.
double radial_integral(const RadialField& f, int power);

/// Re int f conj(g) dx over R^3.
double dot(const RadialField& f, const RadialField& g);

/// int f conj(g) dx over R^3.
cplx inner(const RadialField& f, const RadialField& g);

/// Fourth-order centered d/dr with the parity reflection at r = 0 and
/// one-sided fourth-order stencils at r_max.
std::vector<cplx> radial_derivative(const RadialField& u);

/// Fourth-order u'' + (2/r) u' (3 u''(0) at the origin).
std::vector<cplx> radial_laplacian(const RadialField& u);

struct FunctionalReport {
  double mass = 0.0;
  double energy = 0.0;
  double virial = 0.0;
  double l2 = 0.0;     // ||u||_{L^2}
  double h1dot = 0.0;  // ||grad u||_{L^2}
  double l4 = 0.0;     // ||u||_{L^4}
  double l6 = 0.0;     // ||u||_{L^6}
  std::array<double, 3> momentum{0.0, 0.0, 0.0};

  double grad_sq() const { return h1dot * h1dot; }
  double l4_4() const { return l4 * l4 * l4 * l4; }
  double l6_6() const { return l6 * l6 * l6 * l6 * l6 * l6; }
};

/// Raw integrals behind FunctionalReport, kept unrounded by sqrt.
struct NormIntegrals {
  double mass = 0.0;
  double grad_sq = 0.0;
  double l4_4 = 0.0;
  double l6_6 = 0.0;
};

NormIntegrals norm_integrals(const RadialField& u);
FunctionalReport functionals(const RadialField& u);

double energy_of(const NormIntegrals& n);
double virial_of(const NormIntegrals& n);

/// Localized virial weight w_R(r) = R^2 phi(r / R) sampled with its radial
/// derivatives. R = kInfiniteRadius gives w = r^2.
struct VirialWeight {
  RadialGrid grid;
  double R;
  std::vector<double> w;
  std::vector<double> dw;
  std::vector<double> d2w;
  std::vector<double> lap;
  std::vector<double> bilap;

  bool infinite() const { return R == kInfiniteRadius; }
};

/// Transition profile chi of the cutoff: 1 on [0, 1], 0 on [2, inf), C^4,
/// non-increasing. phi' = 2 r chi(r).
double cutoff_chi(double s, int derivative = 0);

/// phi(r): r^2 on [0, 1], non-decreasing, constant on [2, inf).
double cutoff_phi(double s);

VirialWeight virial_weight(double R, const RadialGrid& grid);

/// F_R[u] = int 4|u_r|^2 w'' - |u|^4 Lap w + 4/3 |u|^6 Lap w - LapLap w |u|^2.
double localized_virial_F(const RadialField& u, const VirialWeight& w);

/// P_R[u] = 2 Im int conj(u) u_r w' dx.
double localized_virial_P(const RadialField& u, const VirialWeight& w);

/// Columnar text format: "# r_max=<..> n=<..>" then "r re im" rows.
void write_field(std::ostream& os, const RadialField& f);
RadialField read_field(std::istream& is);

}  // namespace cqnls
