#include "cqnls/linearized.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cqnls/error.hpp"
#include "cqnls/format.hpp"

namespace cqnls {

namespace {

using Vec = std::vector<double>;

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec to_vec(const Eigen::VectorXd& x) { return Vec(x.data(), x.data() + x.size()); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

LinearizedOperators::LinearizedOperators(const SolitonProfile& profile)
    : omega_(profile.omega),
      beta_(profile.beta),
      grad_sq_(profile.norms.grad_sq),
      spectral_(std::make_shared<InteriorSpectral>(profile.field.grid())) {
  if (!profile.field.is_real() || !(profile.beta > 0.0)) {
    throw Error(ErrorKind::invalid_profile, "linearization needs a real profile with beta > 0");
  }
  P_ = profile.field.real_part();
  dP_ = profile.derivative;
  const auto& g = spectral_->grid();
  const std::size_t N = spectral_->size();
  vP_.resize(N);
  wplus_.resize(N);
  wminus_.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double p = P_[i + 1], p2 = p * p;
    vP_[i] = g.r(i + 1) * p;
    wplus_[i] = -3.0 * p2 + 5.0 * p2 * p2;
    wminus_[i] = -p2 + p2 * p2;
  }
  // The sine basis imposes v(r_max) = 0; a profile that has not decayed
  // there turns the spectral derivative into Gibbs noise.
  double vmax = 0.0;
  for (double v : vP_) vmax = std::max(vmax, std::abs(v));
  if (std::abs(vP_.back()) > 1e-9 * vmax) {
    throw Error(ErrorKind::invalid_profile, "profile has not decayed at r_max (r P(r_max) / max r P = " +
                                                format_double(std::abs(vP_.back()) / vmax) + "); enlarge the domain");
  }
}

LinearizedOperators assemble(const SolitonProfile& profile) { return LinearizedOperators(profile); }

std::vector<double> LinearizedOperators::apply_lplus(std::span<const double> v) const {
  Vec out = spectral_->neg_second(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += (omega_ + wplus_[i]) * v[i];
  return out;
}

std::vector<double> LinearizedOperators::apply_lminus(std::span<const double> v) const {
  Vec out = spectral_->neg_second(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += (omega_ + wminus_[i]) * v[i];
  return out;
}

namespace {

RadialField apply_field(const LinearizedOperators& ops, const RadialField& u, bool plus) {
  const auto& sp = ops.spectral();
  const auto v = sp.to_v(u);
  Vec re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  auto op = [&](const Vec& x) { return plus ? ops.apply_lplus(x) : ops.apply_lminus(x); };
  if (u.is_real()) return sp.field_from_v(std::span<const double>(op(re)));
  const Vec a = op(re), b = op(im);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = cplx(a[i], b[i]);
  return sp.field_from_v(std::span<const cplx>(out));
}

}  // namespace

RadialField LinearizedOperators::apply_lplus(const RadialField& u) const { return apply_field(*this, u, true); }
RadialField LinearizedOperators::apply_lminus(const RadialField& u) const { return apply_field(*this, u, false); }

const Eigen::MatrixXd& LinearizedOperators::stiffness() const {
  if (!stiffness_) {
    const std::size_t N = dim();
    auto K = std::make_shared<Eigen::MatrixXd>(N, N);
    Vec col(N);
    for (std::size_t j = 0; j < N; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      col[j] = 1.0;
      const Vec kc = spectral_->neg_second(col);
      for (std::size_t i = 0; i < N; ++i) (*K)(i, j) = kc[i];
    }
    // Symmetrize the round-off.
    *K = 0.5 * (*K + K->transpose());
    stiffness_ = std::move(K);
  }
  return *stiffness_;
}

Eigen::MatrixXd LinearizedOperators::lplus_matrix() const {
  Eigen::MatrixXd m = stiffness();
  for (std::size_t i = 0; i < dim(); ++i) m(i, i) += omega_ + wplus_[i];
  return m;
}

Eigen::MatrixXd LinearizedOperators::lminus_matrix() const {
  Eigen::MatrixXd m = stiffness();
  for (std::size_t i = 0; i < dim(); ++i) m(i, i) += omega_ + wminus_[i];
  return m;
}

double LinearizedOperators::inner(std::span<const double> f, std::span<const double> g) const {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return spectral_->weight() * s;
}

RadialField SpectralData::e_plus() const {
  std::vector<cplx> v(e1.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(e1[i].real(), e2[i].real());
  return RadialField::complex(e1.grid(), std::move(v));
}

RadialField SpectralData::e_minus() const {
  std::vector<cplx> v(e1.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(-e1[i].real(), e2[i].real());
  return RadialField::complex(e1.grid(), std::move(v));
}

Eigen::MatrixXd shifted_script_l(const LinearizedOperators& ops, double s) {
  const auto N = static_cast<Eigen::Index>(ops.dim());
  Eigen::MatrixXd A(2 * N, 2 * N);
  A.topLeftCorner(N, N) = -s * Eigen::MatrixXd::Identity(N, N);
  A.topRightCorner(N, N) = -ops.lminus_matrix();
  A.bottomLeftCorner(N, N) = ops.lplus_matrix();
  A.bottomRightCorner(N, N) = -s * Eigen::MatrixXd::Identity(N, N);
  return A;
}

std::vector<cplx> apply_script_l_v(const LinearizedOperators& ops, std::span<const cplx> h) {
  Vec h1(h.size()), h2(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h1[i] = h[i].real();
    h2[i] = h[i].imag();
  }
  const Vec a = ops.apply_lminus(h2), b = ops.apply_lplus(h1);
  std::vector<cplx> out(h.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx(-a[i], b[i]);
  return out;
}

double h1_norm_v(const LinearizedOperators& ops, std::span<const cplx> v) {
  const auto kv = ops.spectral().neg_second(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (std::conj(v[i]) * kv[i]).real() + std::norm(v[i]);
  return std::sqrt(ops.spectral().weight() * std::max(s, 0.0));
}

SpectralData internal_mode(const LinearizedOperators& ops) {
  const auto N = static_cast<Eigen::Index>(ops.dim());
  const Eigen::MatrixXd Lp = ops.lplus_matrix();
  const Eigen::MatrixXd Lm = ops.lminus_matrix();

  // T = L-^{1/2} L+ L-^{1/2}, formed in the eigenbasis of L- with the
  // kernel eigenvalue clamped at zero.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(Lm);
  if (em.info() != Eigen::Success) throw Error(ErrorKind::spectral_failure, "eigensolver failed on L-");
  const Eigen::VectorXd sq = em.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& Q = em.eigenvectors();
  Eigen::MatrixXd T = Q.transpose() * Lp * Q;
  T = sq.asDiagonal() * T * sq.asDiagonal();
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(T);
  if (et.info() != Eigen::Success) throw Error(ErrorKind::spectral_failure, "eigensolver failed on T");
  const double tau0 = et.eigenvalues()(0);
  if (!(tau0 < -1e-8)) {
    throw Error(ErrorKind::spectral_failure,
                "T has no negative eigenvalue (min " + format_double(tau0) + ", dM/domega = " +
                    format_double(mass_slope(ops)) + "); the soliton has no real unstable mode");
  }
  int negatives = 0;
  for (Eigen::Index i = 0; i < N; ++i) negatives += et.eigenvalues()(i) < -1e-8 ? 1 : 0;

  double lambda = std::sqrt(-tau0);
  Eigen::VectorXd e1 = Q * (sq.asDiagonal() * et.eigenvectors().col(0));
  Eigen::VectorXd e2 = Lp * e1 / lambda;

  // T squares the stiffness, so refine (lambda, e1, e2) by inverse
  // iteration on the first-order block system, which does not.
  {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted_script_l(ops, lambda));
    Eigen::VectorXd x(2 * N);
    x << e1, e2;
    for (int it = 0; it < 3; ++it) {
      x = lu.solve(x);
      x /= x.norm();
    }
    e1 = x.head(N);
    e2 = x.tail(N);
    // Least-squares eigenvalue of the block operator, computed matrix-free.
    const Vec lpe1 = ops.apply_lplus(to_vec(e1));
    const Vec lme2 = ops.apply_lminus(to_vec(e2));
    lambda = (as_eigen(lpe1).dot(e2) - as_eigen(lme2).dot(e1)) / x.squaredNorm();
  }

  SpectralData s{ops.omega(),
                 lambda,
                 to_vec(e1),
                 {},
                 RadialField::zeros(ops.grid()),
                 RadialField::zeros(ops.grid()),
                 RadialField::zeros(ops.grid()),
                 0.0,
                 tau0,
                 static_cast<double>(negatives),
                 {},
                 0.0,
                 0.0};
  // Keep e2 from the block iteration: recomputing it as L+ e1 / lambda
  // would amplify the high-wavenumber error of e1.
  s.v2 = to_vec(e2);

  // Sign: int grad P . grad e1 = <-Lap P, e1> < 0.
  const Vec lapP = ops.spectral().neg_second(ops.vP());
  double gp = ops.inner(lapP, s.v1);
  if (gp > 0.0) {
    for (double& x : s.v1) x = -x;
    for (double& x : s.v2) x = -x;
    gp = -gp;
  }
  // F(e+, e-) with e- = -conj(e+) equals -lambda <e1, e2> = <L- e2, e2> > 0.
  const double raw = -lambda * ops.inner(s.v1, s.v2);
  if (!(raw > 0.0)) throw Error(ErrorKind::spectral_failure, "degenerate pairing F(e+, e-)");
  const double c = 1.0 / std::sqrt(raw);
  for (double& x : s.v1) x *= c;
  for (double& x : s.v2) x *= c;
  s.normalization.raw_pairing = raw;
  s.normalization.scale = c;
  s.normalization.grad_pairing = gp * c;
  s.normalization.pairing = -lambda * ops.inner(s.v1, s.v2);

  s.e1 = ops.spectral().field_from_v(std::span<const double>(s.v1));
  s.e2 = ops.spectral().field_from_v(std::span<const double>(s.v2));

  const Vec r1 = ops.apply_lplus(s.v1);
  const Vec r2 = ops.apply_lminus(s.v2);
  double d1 = 0.0, d2 = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    d1 += std::pow(r1[i] - lambda * s.v2[i], 2);
    d2 += std::pow(r2[i] + lambda * s.v1[i], 2);
  }
  s.sie_residual1 = std::sqrt(d1) / (lambda * norm2(s.v2));
  s.sie_residual2 = std::sqrt(d2) / (lambda * norm2(s.v1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(Lp);
  if (ep.info() != Eigen::Success) throw Error(ErrorKind::spectral_failure, "eigensolver failed on L+");
  s.lambda_z = -ep.eigenvalues()(0);
  Eigen::VectorXd z = ep.eigenvectors().col(0);
  if (z.sum() < 0.0) z = -z;
  z /= std::sqrt(ops.inner(to_vec(z), to_vec(z)));
  s.z_mode = ops.spectral().field_from_v(std::span<const double>(to_vec(z)));
  return s;
}

double quadratic_form_v(const LinearizedOperators& ops, std::span<const double> g1, std::span<const double> g2,
                        std::span<const double> h1, std::span<const double> h2) {
  return 0.5 * ops.inner(ops.apply_lplus(g1), h1) + 0.5 * ops.inner(ops.apply_lminus(g2), h2);
}

namespace {

std::array<Vec, 2> split_v(const LinearizedOperators& ops, const RadialField& f) {
  require_same_grid(f.grid(), ops.grid());
  const auto v = ops.spectral().to_v(f);
  Vec re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {re, im};
}

}  // namespace

double quadratic_form(const LinearizedOperators& ops, const RadialField& g, const RadialField& h) {
  const auto [g1, g2] = split_v(ops, g);
  const auto [h1, h2] = split_v(ops, h);
  return quadratic_form_v(ops, g1, g2, h1, h2);
}

RadialField apply_script_l(const LinearizedOperators& ops, const RadialField& h) {
  require_same_grid(h.grid(), ops.grid());
  const auto v = apply_script_l_v(ops, ops.spectral().to_v(h));
  return ops.spectral().field_from_v(std::span<const cplx>(v));
}

std::vector<double> apply_lplus_l1(const LinearizedOperators& ops, std::span<const double> v) {
  const std::size_t N = v.size();
  const auto& g = ops.grid();
  const double h = g.spacing();
  // Node index k = i + 1; v_0 = 0, v(-r) = v(r), v(r_max) = 0 with odd reflection beyond.
  auto at = [&](std::ptrdiff_t k) -> double {
    const auto n = static_cast<std::ptrdiff_t>(N) + 2;
    if (k < 0) k = -k;
    if (k == 0 || k == n - 1) return 0.0;
    if (k >= n) return -v[static_cast<std::size_t>(2 * (n - 1) - k - 1)];
    return v[static_cast<std::size_t>(k - 1)];
  };
  Vec out(N);
  const double c = 1.0 / (12.0 * h * h);
  for (std::size_t i = 0; i < N; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i + 1);
    const double r = g.r(i + 1);
    const double d2 = c * (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2));
    out[i] = -d2 + (2.0 / (r * r) + ops.omega() + ops.wplus()[i]) * v[i];
  }
  return out;
}

std::vector<double> lplus_Y(const LinearizedOperators& ops) {
  // L+ (x.grad P + 3/2 P) = -2 Lap P + 6P^5 - 3P^3 = -2 omega P - P^3 + 4 P^5.
  const auto& g = ops.grid();
  Vec out(ops.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = ops.P()[i + 1];
    out[i] = g.r(i + 1) * (-2.0 * ops.omega() * p - p * p * p + 4.0 * std::pow(p, 5));
  }
  return out;
}

namespace {

Vec random_smooth(const LinearizedOperators& ops, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), width(0.5, 4.0), centre(0.0, 6.0);
  const auto& g = ops.grid();
  Vec v(ops.dim(), 0.0);
  for (int term = 0; term < 4; ++term) {
    const double a = amp(rng), w = width(rng), c = centre(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = g.r(i + 1);
      // Even in r about the origin so u = v / r is smooth there.
      const double x1 = (r - c) / w, x2 = (r + c) / w;
      v[i] += r * a * (std::exp(-x1 * x1) + std::exp(-x2 * x2));
    }
  }
  return v;
}

}  // namespace

namespace {

IdentityReport identity_suite_impl(const LinearizedOperators& ops, const SpectralData* spec, int random_pairs,
                                   unsigned seed) {
  IdentityReport rep;
  const auto& g = ops.grid();
  const std::size_t N = ops.dim();
  const double G = ops.grad_sq();
  const double beta = ops.beta();
  const Vec lapP = ops.spectral().neg_second(ops.vP());  // -Lap P in v space

  auto rel = [](const Vec& a, const Vec& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    return std::sqrt(num / den);
  };

  // g = x.grad P / 2 = r P' / 2.
  Vec vg(N);
  for (std::size_t i = 0; i < N; ++i) vg[i] = 0.5 * g.r(i + 1) * g.r(i + 1) * ops.dP()[i + 1];
  const Vec lpg = ops.apply_lplus(vg);
  rep.lplus_scaling = rel(lpg, lapP);
  rep.scaling_form_value = ops.inner(lpg, vg);
  rep.scaling_form_h1 = 0.5 * ops.inner(ops.spectral().neg_second(vg), vg);
  rep.scaling_form = std::abs(rep.scaling_form_value + rep.scaling_form_h1) / rep.scaling_form_h1;

  const Vec lpP = ops.apply_lplus(ops.vP());
  const double fP = ops.inner(lpP, ops.vP());
  const double fP_expected = 4.0 / 3.0 * (beta - 2.0) * G;
  rep.form_P = std::abs(fP - fP_expected) / std::abs(fP_expected);

  Vec expect(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double p = ops.P()[i + 1];
    expect[i] = g.r(i + 1) * (4.0 * std::pow(p, 5) - 2.0 * p * p * p);
  }
  rep.lplus_P = rel(lpP, expect);

  Vec vY(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double r = g.r(i + 1);
    vY[i] = r * (r * ops.dP()[i + 1] + 1.5 * ops.P()[i + 1]);
  }
  const Vec lpY = ops.apply_lplus(vY);
  Vec lpY_expect(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double p = ops.P()[i + 1];
    // -2 Lap P + 6P^5 - 3P^3 with Lap P taken spectrally.
    lpY_expect[i] = 2.0 * lapP[i] + g.r(i + 1) * (6.0 * std::pow(p, 5) - 3.0 * p * p * p);
  }
  rep.lplus_Y = rel(lpY, lpY_expect);

  const Vec lmP = ops.apply_lminus(ops.vP());
  rep.lminus_P = norm2(lmP) / norm2(lapP);

  if (spec) rep.lap_e1 = std::abs(ops.inner(lapP, spec->v1));

  std::mt19937_64 rng(seed);
  double anti = 0.0, ip = 0.0;
  for (int k = 0; k < random_pairs; ++k) {
    const Vec h1 = random_smooth(ops, rng), h2 = random_smooth(ops, rng);
    const Vec g1 = random_smooth(ops, rng), g2 = random_smooth(ops, rng);
    // L h = (-L- h2, L+ h1).
    Vec Lh1 = ops.apply_lminus(h2), Lh2 = ops.apply_lplus(h1);
    for (double& x : Lh1) x = -x;
    Vec Lg1 = ops.apply_lminus(g2), Lg2 = ops.apply_lplus(g1);
    for (double& x : Lg1) x = -x;
    const double a = quadratic_form_v(ops, Lh1, Lh2, g1, g2);
    const double b = quadratic_form_v(ops, h1, h2, Lg1, Lg2);
    const double scale = std::abs(a) + std::abs(b);
    anti = std::max(anti, std::abs(a + b) / scale);
    // F(iP, h) = 1/2 <L- P, h2>.
    const Vec zero(N, 0.0);
    const double fiph = quadratic_form_v(ops, zero, ops.vP(), h1, h2);
    ip = std::max(ip, std::abs(fiph) / (0.5 * norm2(lapP) * norm2(h2) * ops.spectral().weight()));
  }
  rep.antisymmetry = anti;
  rep.iP_orthogonality = ip;

  Vec vd(N);
  for (std::size_t i = 0; i < N; ++i) vd[i] = g.r(i + 1) * ops.dP()[i + 1];
  const Vec l1 = apply_lplus_l1(ops, vd);
  rep.l1_orthogonality = norm2(l1) / norm2(ops.spectral().neg_second(vd));
  return rep;
}

}  // namespace

IdentityReport identity_suite(const LinearizedOperators& ops, const SpectralData& spec, int random_pairs,
                              unsigned seed) {
  return identity_suite_impl(ops, &spec, random_pairs, seed);
}

IdentityReport identity_suite(const LinearizedOperators& ops, int random_pairs, unsigned seed) {
  return identity_suite_impl(ops, nullptr, random_pairs, seed);
}

namespace {

// Smallest eigenvalue of B^{-1/2} A B^{-1/2} restricted to the complement of
// B^{-1/2} span(constraints), with A = K + diag(d) and B = K + I (the H^1
// Gram matrix; the common quadrature weight cancels).
double constrained_min(const LinearizedOperators& ops, const Vec& d, const std::vector<Vec>& constraints) {
  const auto& sp = ops.spectral();
  const std::size_t N = ops.dim();
  const auto& k = sp.wavenumbers();
  Vec binv(N), kk(N);
  for (std::size_t m = 0; m < N; ++m) {
    binv[m] = 1.0 / std::sqrt(k[m] * k[m] + 1.0);
    kk[m] = k[m] * k[m] / (k[m] * k[m] + 1.0);
  }
  Eigen::MatrixXd A(N, N);
  Vec col(N);
  // B^{-1/2} diag(d) B^{-1/2} column by column, plus S diag(k^2/(k^2+1)) S.
  Eigen::MatrixXd X(N, N);
  for (std::size_t j = 0; j < N; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    const Vec bj = sp.apply_symbol(col, binv);
    Vec dj(N);
    for (std::size_t i = 0; i < N; ++i) dj[i] = d[i] * bj[i];
    const Vec xj = sp.apply_symbol(dj, binv);
    const Vec kj = sp.apply_symbol(col, kk);
    for (std::size_t i = 0; i < N; ++i) A(i, j) = xj[i] + kj[i];
  }
  A = 0.5 * (A + A.transpose());
  if (!constraints.empty()) {
    Eigen::MatrixXd C(N, constraints.size());
    for (std::size_t c = 0; c < constraints.size(); ++c) {
      const Vec bc = sp.apply_symbol(constraints[c], binv);
      for (std::size_t i = 0; i < N; ++i) C(i, c) = bc[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0)) {
      throw Error(ErrorKind::ill_conditioned, "constraint vectors are numerically dependent");
    }
    const Eigen::MatrixXd U = svd.matrixU();
    const Eigen::MatrixXd Pi = Eigen::MatrixXd::Identity(N, N) - U * U.transpose();
    const double sigma = 10.0 + A.diagonal().cwiseAbs().maxCoeff();
    A = Pi * A * Pi + sigma * U * U.transpose();
    A = 0.5 * (A + A.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::spectral_failure, "eigensolver failed");
  return es.eigenvalues()(0);
}

}  // namespace

namespace {

double coercivity_impl(const LinearizedOperators& ops, const SpectralData* spec, ConstraintSet set) {
  Vec dplus(ops.dim()), dminus(ops.dim());
  for (std::size_t i = 0; i < ops.dim(); ++i) {
    dplus[i] = ops.omega() + ops.wplus()[i];
    dminus[i] = ops.omega() + ops.wminus()[i];
  }
  std::vector<Vec> c1, c2;
  switch (set) {
    case ConstraintSet::none:
      break;
    case ConstraintSet::y_perp:
      if (!spec) throw Error(ErrorKind::invalid_argument, "the Y-perp constraints need the internal mode");
      c1 = {spec->v2};
      c2 = {ops.vP(), spec->v1};
      break;
    case ConstraintSet::modulation:
      c1 = {lplus_Y(ops)};
      c2 = {ops.vP()};
      break;
  }
  // F(h) / ||h||_{H1}^2 splits into independent real and imaginary blocks.
  const double m1 = constrained_min(ops, dplus, c1);
  const double m2 = constrained_min(ops, dminus, c2);
  return 0.5 * std::min(m1, m2);
}

}  // namespace

double coercivity_estimate(const LinearizedOperators& ops, const SpectralData& spec, ConstraintSet set) {
  return coercivity_impl(ops, &spec, set);
}

double coercivity_estimate(const LinearizedOperators& ops, ConstraintSet set) {
  return coercivity_impl(ops, nullptr, set);
}

double mass_slope(const LinearizedOperators& ops) {
  // L+ dP/domega = -P, so dM/domega = 2 <dP/domega, P> = -2 <L+^{-1} P, P>.
  const Eigen::VectorXd p = as_eigen(ops.vP());
  const Eigen::VectorXd q = ops.lplus_matrix().partialPivLu().solve(p);
  return -2.0 * ops.spectral().weight() * q.dot(p);
}

double lminus_gap(const LinearizedOperators& ops) {
  const Eigen::MatrixXd Lm = ops.lminus_matrix();
  const auto N = static_cast<Eigen::Index>(ops.dim());
  Eigen::VectorXd p = as_eigen(ops.vP());
  p /= p.norm();
  const Eigen::MatrixXd Pi = Eigen::MatrixXd::Identity(N, N) - p * p.transpose();
  Eigen::MatrixXd A = Pi * Lm * Pi + (10.0 + Lm.diagonal().maxCoeff()) * p * p.transpose();
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::string spectral_json(const SpectralData& s) {
  std::ostringstream os;
  os << "{\"omega\": " << format_double(s.omega) << ", \"lambda1\": " << format_double(s.lambda1)
     << ", \"normalization\": {\"convention\": \"F(e+, e-) = 1 with e- = -conj(e+); int grad P . grad e1 < 0\""
     << ", \"raw_pairing\": " << format_double(s.normalization.raw_pairing)
     << ", \"scale\": " << format_double(s.normalization.scale)
     << ", \"pairing\": " << format_double(s.normalization.pairing)
     << ", \"grad_pairing\": " << format_double(s.normalization.grad_pairing) << "}}\n";
  return os.str();
}

}  // namespace cqnls
