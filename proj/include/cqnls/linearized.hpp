#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "cqnls/groundstate.hpp"
#include "cqnls/radial.hpp"
#include "cqnls/sine_transform.hpp"

namespace cqnls {

/// L+ = -Lap + omega - 3P^2 + 5P^4 and L- = -Lap + omega - P^2 + P^4 on the
/// radial sector, acting on v = r u over the interior nodes with Dirichlet
/// ends. The Laplacian is the sine-spectral one, so the dense matrices are
/// symmetric and the matrix-free applications go through the DST.
class LinearizedOperators {
 public:
  explicit LinearizedOperators(const SolitonProfile& profile);

  double omega() const noexcept { return omega_; }
  double beta() const noexcept { return beta_; }
  double grad_sq() const noexcept { return grad_sq_; }
  const RadialGrid& grid() const noexcept { return spectral_->grid(); }
  const InteriorSpectral& spectral() const noexcept { return *spectral_; }
  std::size_t dim() const noexcept { return spectral_->size(); }

  /// Interior samples: v = r P, and the potentials -3P^2 + 5P^4, -P^2 + P^4.
  const std::vector<double>& vP() const noexcept { return vP_; }
  const std::vector<double>& P() const noexcept { return P_; }    // full grid
  const std::vector<double>& dP() const noexcept { return dP_; }  // full grid
  const std::vector<double>& wplus() const noexcept { return wplus_; }
  const std::vector<double>& wminus() const noexcept { return wminus_; }

  std::vector<double> apply_lplus(std::span<const double> v) const;
  std::vector<double> apply_lminus(std::span<const double> v) const;

  /// Field-level versions (u -> L u on the full grid, u(r_max) = 0).
  RadialField apply_lplus(const RadialField& u) const;
  RadialField apply_lminus(const RadialField& u) const;

  /// Dense matrices in v space (symmetric).
  Eigen::MatrixXd lplus_matrix() const;
  Eigen::MatrixXd lminus_matrix() const;
  /// Spectral -d^2/dr^2 on the interior.
  const Eigen::MatrixXd& stiffness() const;

  /// <f, g> in L^2(R^3) for interior v-space vectors.
  double inner(std::span<const double> f, std::span<const double> g) const;

 private:
  double omega_;
  double beta_;
  double grad_sq_;
  std::shared_ptr<const InteriorSpectral> spectral_;
  std::vector<double> P_, dP_, vP_, wplus_, wminus_;
  mutable std::shared_ptr<Eigen::MatrixXd> stiffness_;
};

LinearizedOperators assemble(const SolitonProfile& profile);

struct Normalization {
  double raw_pairing = 0.0;  // F(e+, e-) before scaling
  double scale = 0.0;        // factor applied to (e1, e2)
  double pairing = 0.0;      // F(e+, e-) after scaling
  double grad_pairing = 0.0; // int grad P . grad e1 (made negative)
};

struct SpectralData {
  double omega = 0.0;
  double lambda1 = 0.0;
  std::vector<double> v1, v2;  // v = r e_i on the interior
  RadialField e1;
  RadialField e2;
  RadialField z_mode;
  double lambda_z = 0.0;       // L+ z = -lambda_z z
  double t_min = 0.0;          // most negative eigenvalue of T = L-^{1/2} L+ L-^{1/2}
  double t_negative_count = 0; // eigenvalues of T below -1e-8
  Normalization normalization;
  double sie_residual1 = 0.0;  // ||L+ e1 - lambda1 e2|| / (lambda1 ||e2||)
  double sie_residual2 = 0.0;  // ||L- e2 + lambda1 e1|| / (lambda1 ||e1||)

  /// e+ = e1 + i e2 as a complex field.
  RadialField e_plus() const;
  /// e- = -conj(e+), the partner with F(e+, e-) = +1.
  RadialField e_minus() const;
};

/// Throws spectral_failure when T = L-^{1/2} L+ L-^{1/2} has no negative
/// eigenvalue, i.e. when there is no real unstable mode to return.
SpectralData internal_mode(const LinearizedOperators& ops);

/// F(g, h) = 1/2 <L+ Re g, Re h> + 1/2 <L- Im g, Im h>.
double quadratic_form(const LinearizedOperators& ops, const RadialField& g, const RadialField& h);
double quadratic_form_v(const LinearizedOperators& ops, std::span<const double> g1, std::span<const double> g2,
                        std::span<const double> h1, std::span<const double> h2);

/// Script L (h1 + i h2) = -L- h2 + i L+ h1.
RadialField apply_script_l(const LinearizedOperators& ops, const RadialField& h);
std::vector<cplx> apply_script_l_v(const LinearizedOperators& ops, std::span<const cplx> h);

/// Dense Script L - s on the stacked real vector (h1; h2).
Eigen::MatrixXd shifted_script_l(const LinearizedOperators& ops, double s);

/// H^1(R^3) norm of the field with interior v-samples v.
double h1_norm_v(const LinearizedOperators& ops, std::span<const cplx> v);

/// L+ restricted to angular momentum 1, acting on v = r f (f the radial
/// factor of f(r) x_j / r), by fourth-order differences with the even
/// reflection of v at r = 0.
std::vector<double> apply_lplus_l1(const LinearizedOperators& ops, std::span<const double> v);

struct IdentityReport {
  double lplus_scaling = 0.0;   // ||L+(r P'/2) + Lap P|| / ||Lap P||
  double scaling_form = 0.0;    // |<L+ g, g> + 1/2 ||g||^2_{H1dot}| / (1/2 ||g||^2_{H1dot}), g = r P'/2
  double scaling_form_value = 0.0;
  double scaling_form_h1 = 0.0;  // 1/2 ||g||^2_{H1dot}
  double form_P = 0.0;           // |<L+ P, P> - 4/3 (beta - 2) G| / |4/3 (beta - 2) G|
  double lplus_P = 0.0;          // ||L+ P - (4P^5 - 2P^3)|| / ||4P^5 - 2P^3||
  double lplus_Y = 0.0;          // ||L+ Y - (-2 Lap P + 6 P^5 - 3 P^3)|| / ||.||
  double lminus_P = 0.0;         // ||L- P|| / ||Lap P||
  double lap_e1 = 0.0;           // |int Lap P e1|
  double antisymmetry = 0.0;     // max over random pairs of |F(Lh, g) + F(h, Lg)| / scale
  double iP_orthogonality = 0.0; // max |F(iP, h)| / (||L- P|| ||h||)
  double l1_orthogonality = 0.0; // ||L+^{(1)} (r P')|| / ||r P'||_{H2-ish}
};

IdentityReport identity_suite(const LinearizedOperators& ops, const SpectralData& spec, int random_pairs = 50,
                              unsigned seed = 7);
/// Same, without the e1 entry (lap_e1 stays 0).
IdentityReport identity_suite(const LinearizedOperators& ops, int random_pairs = 50, unsigned seed = 7);

enum class ConstraintSet { none, y_perp, modulation };

/// Smallest generalized Rayleigh quotient F(h) / ||h||^2_{H1} over h
/// orthogonal (in L^2) to the chosen constraint vectors.
double coercivity_estimate(const LinearizedOperators& ops, const SpectralData& spec, ConstraintSet set);
/// For the sets that do not involve e+ (none, modulation).
double coercivity_estimate(const LinearizedOperators& ops, ConstraintSet set);

/// dM(P_omega)/domega = -2 <L+^{-1} P, P>. The internal mode exists exactly
/// when this is negative.
double mass_slope(const LinearizedOperators& ops);

/// Smallest eigenvalue of L- on the L^2-orthogonal complement of P.
double lminus_gap(const LinearizedOperators& ops);

/// L+ (x . grad P + 3/2 P) in v space, computed from the profile pointwise.
std::vector<double> lplus_Y(const LinearizedOperators& ops);

std::string spectral_json(const SpectralData& s);

}  // namespace cqnls
