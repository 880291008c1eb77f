#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqnls/groundstate.hpp"
#include "cqnls/radial.hpp"
#include "cqnls/sine_transform.hpp"

namespace cqnls {

struct EvolutionConfig {
  double dt = 0.05;
  double t_start = 0.0;
  double t_end = 20.0;  // below t_start for a backward run
  double layer_width = 0.0;     // absorbing layer on [r_max - width, r_max]; at most 0.2 r_max
  double layer_strength = 1.0;  // peak damping rate
  std::size_t record_every = 1;
  std::size_t snapshot_every = 0;  // in records; 0 keeps none
  double virial_R = kInfiniteRadius;
  bool nonlinear = true;
};

/// Throws invalid_argument when the configuration is unusable on `grid`.
void validate(const EvolutionConfig& cfg, const RadialGrid& grid);

struct DiagnosticRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double virial = 0.0;
  double PR = 0.0;  // localized virial P_R
  double FR = 0.0;  // its time derivative F_R, evaluated on the state
  double l4 = 0.0;  // ||u||_{L4}
  double grad_sq = 0.0;
  double h1dist = 0.0;  // min over phase of ||u - e^{i phi} P||_{H1}; 0 without a profile
  double absdev = 0.0;  // || |u| - P ||_{L2}; 0 without a profile
};

struct Trajectory {
  RadialGrid grid;
  std::vector<DiagnosticRow> rows;
  std::vector<double> snapshot_times;
  std::vector<RadialField> snapshots;
  RadialField final_state;
  double last_good_time = 0.0;
};

/// Diagnostics of one state. `P` (samples of the profile on u's grid) may be empty.
DiagnosticRow diagnose(const InteriorSpectral& sp, std::span<const cplx> v, double t, const VirialWeight& w,
                       std::span<const double> P);

/// Strang split-step: exact linear flow in the sine basis of v = r u and
/// exact pointwise phase rotation for the nonlinearity.
Trajectory evolve(const RadialField& u0, const EvolutionConfig& cfg, const SolitonProfile* profile = nullptr);

/// Profile samples on an arbitrary grid.
std::vector<double> sample_profile(const SolitonProfile& profile, const RadialGrid& grid);

struct ModulationPoint {
  double theta = 0.0;
  double alpha = 0.0;
  RadialField h;
  double delta = 0.0;  // |V(u)|
  double h_h1 = 0.0;
  double residual_phase = 0.0;  // |Im <h, P>|
  double residual_scaling = 0.0;  // |<Re h, L+(x.grad P + 3/2 P)>|
};

/// Decomposes exp(-i theta) exp(-i omega t) u = (1 + alpha) P + h.
ModulationPoint modulation_fit(const RadialField& u, double t, const SolitonProfile& profile, double tube = 0.3);

/// max |dP_R/dt - F_R| over recorded rows [begin, end), by centered differences.
double virial_identity_check(const Trajectory& traj, std::size_t begin = 0, std::size_t end = 0);

struct RateFit {
  double slope = 0.0;      // of log h1dist against t
  double intercept = 0.0;
  double rate = 0.0;       // |slope|
  std::size_t begin = 0, end = 0;
  std::optional<double> exit_time;  // first time the distance leaves the fit tube
  bool degenerate = false;          // distance at the floor; no rate
};

/// Fits log ||u(t) - e^{i(omega t + theta)} P||_{H1} on the leading run of rows
/// whose distance stays below tube * ||P||_{H1}.
RateFit convergence_rate(const Trajectory& traj, const SolitonProfile& profile, double tube = 0.3);

struct Verdict {
  std::string verdict;  // dispersing, soliton-locked or undetermined
  double l4_loglog_slope = 0.0;
  double l4_drop = 0.0;  // max ||u||_4 / final ||u||_4
  double min_virial = 0.0;
  bool virial_positive = false;
  double max_rel_dist = 0.0;
  std::string note;
};

Verdict scattering_indicator(const Trajectory& traj, const SolitonProfile* profile = nullptr);

struct GradientComparison {
  std::vector<double> t;
  std::vector<double> diff;  // ||grad u||^2 - ||grad P||^2
  bool all_negative = false;
  bool all_positive = false;
  std::size_t sign_changes = 0;
};

GradientComparison gradient_comparison(const Trajectory& traj, const SolitonProfile& profile);

std::string diagnostics_csv(const Trajectory& traj);
std::string verdict_json(const Verdict& v);

}  // namespace cqnls
