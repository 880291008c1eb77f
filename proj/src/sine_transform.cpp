#include "cqnls/sine_transform.hpp"

#include <fftw3.h>

#include <cmath>

#include "cqnls/error.hpp"

namespace cqnls {

struct SineTransform::Plan {
  double* buf = nullptr;
  fftw_plan plan = nullptr;
  double scale = 1.0;

  explicit Plan(std::size_t n) {
    buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    if (buf == nullptr) throw Error(ErrorKind::spectral_failure, "fftw_malloc failed");
    plan = fftw_plan_r2r_1d(static_cast<int>(n), buf, buf, FFTW_RODFT00, FFTW_ESTIMATE);
    if (plan == nullptr) throw Error(ErrorKind::spectral_failure, "could not plan DST-I");
    scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n + 1));
  }
  ~Plan() {
    if (plan != nullptr) fftw_destroy_plan(plan);
    if (buf != nullptr) fftw_free(buf);
  }
};

SineTransform::SineTransform(std::size_t n) : n_(n), plan_(std::make_unique<Plan>(n)) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "empty sine transform");
}
SineTransform::~SineTransform() = default;
SineTransform::SineTransform(SineTransform&&) noexcept = default;
SineTransform& SineTransform::operator=(SineTransform&&) noexcept = default;

void SineTransform::apply(std::span<double> x) const {
  if (x.size() != n_) throw Error(ErrorKind::invalid_argument, "sine transform length mismatch");
  std::copy(x.begin(), x.end(), plan_->buf);
  fftw_execute(plan_->plan);
  for (std::size_t i = 0; i < n_; ++i) x[i] = plan_->buf[i] * plan_->scale;
}

void SineTransform::apply(std::span<cplx> x) const {
  if (x.size() != n_) throw Error(ErrorKind::invalid_argument, "sine transform length mismatch");
  for (std::size_t i = 0; i < n_; ++i) plan_->buf[i] = x[i].real();
  fftw_execute(plan_->plan);
  std::vector<double> re(plan_->buf, plan_->buf + n_);
  for (std::size_t i = 0; i < n_; ++i) plan_->buf[i] = x[i].imag();
  fftw_execute(plan_->plan);
  for (std::size_t i = 0; i < n_; ++i) x[i] = cplx(re[i], plan_->buf[i]) * plan_->scale;
}

struct InteriorSpectral::CosinePlan {
  double* buf = nullptr;
  fftw_plan plan = nullptr;
  std::size_t n = 0;

  explicit CosinePlan(std::size_t len) : n(len) {
    buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    if (buf == nullptr) throw Error(ErrorKind::spectral_failure, "fftw_malloc failed");
    plan = fftw_plan_r2r_1d(static_cast<int>(n), buf, buf, FFTW_REDFT00, FFTW_ESTIMATE);
    if (plan == nullptr) throw Error(ErrorKind::spectral_failure, "could not plan DCT-I");
  }
  ~CosinePlan() {
    if (plan != nullptr) fftw_destroy_plan(plan);
    if (buf != nullptr) fftw_free(buf);
  }
  CosinePlan(const CosinePlan&) = delete;
  CosinePlan& operator=(const CosinePlan&) = delete;
};

InteriorSpectral::InteriorSpectral(const RadialGrid& grid)
    : grid_(grid),
      transform_(grid.size() - 2),
      k_(grid.size() - 2),
      cosine_(std::make_shared<CosinePlan>(grid.size())) {
  for (std::size_t m = 0; m < k_.size(); ++m) k_[m] = kPi * static_cast<double>(m + 1) / grid.r_max();
}

std::vector<double> InteriorSpectral::derivative(std::span<const double> v) const {
  const auto c = coefficients(v);
  auto& cp = *cosine_;
  // REDFT00: Y_j = X_0 + (-1)^j X_{n-1} + 2 sum_m X_m cos(pi m j / (n-1)).
  cp.buf[0] = 0.0;
  cp.buf[cp.n - 1] = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) cp.buf[m + 1] = c[m] * k_[m];
  fftw_execute(cp.plan);
  std::vector<double> d(cp.n);
  for (std::size_t j = 0; j < cp.n; ++j) d[j] = 0.5 * cp.buf[j];
  return d;
}

std::vector<cplx> InteriorSpectral::derivative(std::span<const cplx> v) const {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  const auto a = derivative(re), b = derivative(im);
  std::vector<cplx> d(a.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = cplx(a[j], b[j]);
  return d;
}

std::vector<double> InteriorSpectral::neg_second(std::span<const double> v) const {
  std::vector<double> x(v.begin(), v.end());
  transform_.apply(x);
  for (std::size_t m = 0; m < x.size(); ++m) x[m] *= k_[m] * k_[m];
  transform_.apply(x);
  return x;
}

std::vector<cplx> InteriorSpectral::neg_second(std::span<const cplx> v) const {
  std::vector<cplx> x(v.begin(), v.end());
  transform_.apply(x);
  for (std::size_t m = 0; m < x.size(); ++m) x[m] *= k_[m] * k_[m];
  transform_.apply(x);
  return x;
}

std::vector<double> InteriorSpectral::apply_symbol(std::span<const double> v, std::span<const double> symbol) const {
  std::vector<double> x(v.begin(), v.end());
  transform_.apply(x);
  for (std::size_t m = 0; m < x.size(); ++m) x[m] *= symbol[m];
  transform_.apply(x);
  return x;
}

std::vector<double> InteriorSpectral::to_v(std::span<const double> u) const {
  std::vector<double> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = grid_.r(i + 1) * u[i + 1];
  return v;
}

std::vector<cplx> InteriorSpectral::to_v(const RadialField& u) const {
  require_same_grid(u.grid(), grid_);
  std::vector<cplx> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = grid_.r(i + 1) * u[i + 1];
  return v;
}

std::vector<double> InteriorSpectral::from_v(std::span<const double> v) const {
  const std::size_t n = grid_.size();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) u[i] = v[i - 1] / grid_.r(i);
  u[0] = even_extrapolate_origin(u[1], u[2], u[3]);
  return u;
}

RadialField InteriorSpectral::field_from_v(std::span<const double> v) const {
  return RadialField::real(grid_, from_v(v));
}

RadialField InteriorSpectral::field_from_v(std::span<const cplx> v) const {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  const auto ur = from_v(re);
  const auto ui = from_v(im);
  std::vector<cplx> u(ur.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = cplx(ur[i], ui[i]);
  return RadialField::complex(grid_, std::move(u));
}

std::vector<double> InteriorSpectral::coefficients(std::span<const double> v) const {
  std::vector<double> c(v.begin(), v.end());
  transform_.apply(c);
  // S is orthonormal with entries sqrt(2/(N+1)) sin(k_m r_j).
  const double s = std::sqrt(2.0 / static_cast<double>(size() + 1));
  for (double& x : c) x *= s;
  return c;
}

double InteriorSpectral::interpolate(std::span<const double> coeffs, double r) const {
  if (r <= 0.0 || r >= grid_.r_max()) return 0.0;
  // sin(k_m r) by the Chebyshev recurrence sin((m+1)x) = 2cos(x) sin(mx) - sin((m-1)x).
  const double x = kPi * r / grid_.r_max();
  const double c2 = 2.0 * std::cos(x);
  double s_prev = 0.0, s = std::sin(x), acc = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    acc += coeffs[m] * s;
    const double next = c2 * s - s_prev;
    s_prev = s;
    s = next;
  }
  return acc;
}

}  // namespace cqnls
