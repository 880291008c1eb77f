#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "cqnls/radial.hpp"

namespace cqnls {

/// Orthonormal DST-I of length N (self-inverse): (S x)_m = sqrt(2/(N+1)) sum_j x_j sin(pi (j+1)(m+1)/(N+1)).
///
/// Wraps an FFTW plan made with FFTW_ESTIMATE so results do not depend on
/// timing. Not safe to call concurrently on one instance (shared scratch).
class SineTransform {
 public:
  explicit SineTransform(std::size_t n);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  SineTransform(SineTransform&&) noexcept;
  SineTransform& operator=(SineTransform&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  void apply(std::span<double> x) const;
  void apply(std::span<cplx> x) const;

 private:
  struct Plan;
  std::size_t n_;
  std::unique_ptr<Plan> plan_;
};

/// Spectral calculus in v = r u on the interior nodes r_1..r_{n-2}, with
/// v(0) = v(r_max) = 0. The radial Laplacian of u becomes v'' and the sine
/// modes sin(k_m r), k_m = pi m / r_max, diagonalize it.
class InteriorSpectral {
 public:
  explicit InteriorSpectral(const RadialGrid& grid);

  const RadialGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return transform_.size(); }
  const std::vector<double>& wavenumbers() const noexcept { return k_; }
  const SineTransform& transform() const noexcept { return transform_; }

  /// v -> -v'' (spectral).
  std::vector<double> neg_second(std::span<const double> v) const;
  std::vector<cplx> neg_second(std::span<const cplx> v) const;

  /// v -> f(k_m^2) applied in sine space.
  std::vector<double> apply_symbol(std::span<const double> v, std::span<const double> symbol) const;

  /// Field u on the full grid -> v_i = r_i u_i for i = 1..n-2.
  std::vector<double> to_v(std::span<const double> u) const;
  std::vector<cplx> to_v(const RadialField& u) const;

  /// v on the interior -> u on the full grid: u_i = v_i / r_i, even
  /// extrapolation to r = 0, u(r_max) = 0.
  std::vector<double> from_v(std::span<const double> v) const;
  RadialField field_from_v(std::span<const cplx> v) const;
  RadialField field_from_v(std::span<const double> v) const;

  /// Weight of the R^3 inner product in v space: <f, g> = weight * sum v_f v_g.
  double weight() const noexcept { return 4.0 * kPi * grid_.spacing(); }

  /// Sine-series interpolation of interior samples v to an arbitrary radius.
  double interpolate(std::span<const double> coeffs, double r) const;
  /// Sine coefficients c_m with v(r) = sum_m c_m sin(k_m r).
  std::vector<double> coefficients(std::span<const double> v) const;

  /// v' of the sine interpolant at every grid node (including r = 0 and
  /// r_max), through a DCT-I.
  std::vector<double> derivative(std::span<const double> v) const;
  std::vector<cplx> derivative(std::span<const cplx> v) const;

 private:
  struct CosinePlan;
  RadialGrid grid_;
  SineTransform transform_;
  std::vector<double> k_;
  std::shared_ptr<CosinePlan> cosine_;
};

/// u(0) from u(h), u(2h), u(3h) by the even quadratic in r^2.
inline double even_extrapolate_origin(double u1, double u2, double u3) { return 1.5 * u1 - 0.6 * u2 + 0.1 * u3; }

}  // namespace cqnls
