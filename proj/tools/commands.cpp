#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "cqnls/dynamics.hpp"
#include "cqnls/error.hpp"
#include "cqnls/linearized.hpp"
#include "cqnls/threshold.hpp"
#include "cqnls/variational.hpp"

namespace cqnls::cli {

using json = nlohmann::ordered_json;

Run::Run(fs::path out, KeyValues params) : out_(std::move(out)), params_(std::move(params)) {
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + out_.string() + ": " + ec.message());
}

std::string Run::str(const std::string& key) const {
  const auto it = params_.find(key);
  if (it == params_.end()) throw Error(ErrorKind::invalid_argument, "missing parameter " + key);
  return it->second;
}

double Run::num(const std::string& key) const {
  try {
    return parse_double(str(key));
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_argument, key + ": " + e.what());
  }
}

std::size_t Run::count(const std::string& key) const {
  const double x = num(key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e12) {
    throw Error(ErrorKind::invalid_argument, key + " must be a nonnegative integer");
  }
  return static_cast<std::size_t>(x);
}

bool Run::flag(const std::string& key) const {
  const auto s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorKind::invalid_argument, key + " must be true or false");
}

void Run::write(const std::string& name, const std::string& content) {
  const auto path = out_ / name;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  os << content;
  if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
  outputs_.push_back(name);
}

void Run::write_field(const std::string& name, const RadialField& f) {
  std::ostringstream os;
  cqnls::write_field(os, f);
  write(name, os.str());
}

void say(const std::string& line) { std::cout << line << '\n'; }

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RadialGrid grid_of(const Run& run, const std::string& prefix = "") {
  return make_grid(run.num(prefix + "r_max"), run.count(prefix + "n"));
}

json pohozaev_json(const PohozaevReport& r) {
  return json{{"mass", r.mass}, {"l4", r.l4}, {"l6", r.l6}, {"energy", r.energy}, {"max", r.max()}};
}

json profile_json(const SolitonProfile& p) {
  const auto rs = functionals(rescaled_soliton(p));
  return json{{"omega", p.omega},
              {"r_max", p.field.grid().r_max()},
              {"n", p.field.grid().size()},
              {"p0", p.p0},
              {"beta", p.beta},
              {"mass", p.norms.mass},
              {"energy", energy_of(p.norms)},
              {"virial", virial_of(p.norms)},
              {"grad_sq", p.norms.grad_sq},
              {"l4_4", p.norms.l4_4},
              {"l6_6", p.norms.l6_6},
              {"virial_rel", std::abs(virial_of(p.norms)) / p.norms.grad_sq},
              {"pohozaev", pohozaev_json(pohozaev_report(p))},
              {"rescaled", {{"mass", rs.mass}, {"energy", rs.energy}, {"virial", rs.virial},
                            {"virial_rel", std::abs(rs.virial) / p.norms.grad_sq}}}};
}

json identities_json(const IdentityReport& id, bool with_e1) {
  json j{{"lplus_scaling", id.lplus_scaling},
         {"scaling_form", id.scaling_form},
         {"scaling_form_value", id.scaling_form_value},
         {"scaling_form_half_h1dot", id.scaling_form_h1},
         {"form_P", id.form_P},
         {"lplus_P", id.lplus_P},
         {"lplus_Y", id.lplus_Y},
         {"lminus_P", id.lminus_P},
         {"antisymmetry", id.antisymmetry},
         {"iP_orthogonality", id.iP_orthogonality},
         {"l1_orthogonality", id.l1_orthogonality}};
  j["lap_e1"] = with_e1 ? json(id.lap_e1) : json(nullptr);
  return j;
}

double t0_of(const Run& run, const std::string& key, double lambda1) {
  const auto s = run.str(key);
  return s == "auto" ? 8.0 / lambda1 : run.num(key);
}

std::string residual_csv(const ResidualProfile& rp, double lambda1) {
  std::ostringstream os;
  os << "t,t_lambda,residual_h1,floor_h1\n";
  for (std::size_t i = 0; i < rp.t_grid.size(); ++i) {
    os << format_double(rp.t_grid[i]) << ',' << format_double(rp.t_grid[i] * lambda1) << ','
       << format_double(rp.residual_norms[i]) << ',' << format_double(rp.floor_norms[i]) << '\n';
  }
  return os.str();
}

}  // namespace

int cmd_groundstate(Run& run) {
  const auto p = solve_ground_state(run.num("omega"), grid_of(run));
  run.write_field("profile.txt", p.field);
  run.write_field("rescaled.txt", rescaled_soliton(p));
  const auto j = profile_json(p);
  run.write("groundstate.json", dump(j));
  say("omega " + format_double(p.omega) + "  beta " + format_double(p.beta) + "  max identity residual " +
      format_double(pohozaev_report(p).max()));
  return 0;
}

int cmd_phasediagram(Run& run) {
  const auto grid = grid_of(run);
  const auto omegas = default_omega_grid(run.count("count"), run.num("omega_min"), run.num("omega_max"));
  const std::size_t workers = std::max<std::size_t>(1, run.count("workers"));
  FamilyTable family{grid, {}};
  if (workers == 1) {
    family = sweep_family(omegas, grid);
  } else {
    // Cold starts per row so rows are independent.
    for (std::size_t i = 0; i < omegas.size(); i += workers) {
      std::vector<std::future<FamilyRow>> jobs;
      for (std::size_t j = i; j < std::min(omegas.size(), i + workers); ++j) {
        jobs.push_back(std::async(std::launch::async, [&, j] { return family_row(solve_ground_state(omegas[j], grid)); }));
      }
      for (auto& f : jobs) family.rows.push_back(f.get());
    }
  }
  run.write("family.csv", family_csv(family));
  const auto curves = boundary_curves(family);
  run.write("curves.csv", curves_csv(curves));
  run.write("curves.json", curves_json(curves));
  say("m0 " + format_double(curves.m0) + "  m1 " + (curves.m1 ? format_double(*curves.m1) : "none") + "  m2 " +
      format_double(curves.m2));
  return 0;
}

int cmd_spectrum(Run& run) {
  const auto p = solve_ground_state(run.num("omega"), grid_of(run));
  const auto ops = assemble(p);
  const auto mode = run.str("coercivity");
  if (mode != "all" && mode != "none" && mode != "y-perp" && mode != "modulation" && mode != "skip") {
    throw Error(ErrorKind::invalid_argument, "coercivity must be all, none, y-perp, modulation or skip");
  }
  const int pairs = static_cast<int>(run.count("pairs"));
  const auto seed = static_cast<unsigned>(run.count("seed"));
  const double slope = mass_slope(ops);
  std::optional<SpectralData> spec;
  std::string failure;
  try {
    spec = internal_mode(ops);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::spectral_failure) throw;
    failure = e.what();
  }

  json sj{{"omega", p.omega}, {"mass_slope", slope}, {"lminus_gap", lminus_gap(ops)}};
  if (spec) {
    sj["lambda1"] = spec->lambda1;
    sj["lambda_z"] = spec->lambda_z;
    sj["t_min"] = spec->t_min;
    sj["t_negative_count"] = spec->t_negative_count;
    sj["sie_residual1"] = spec->sie_residual1;
    sj["sie_residual2"] = spec->sie_residual2;
    sj["normalization"] = {{"raw_pairing", spec->normalization.raw_pairing},
                           {"scale", spec->normalization.scale},
                           {"pairing", spec->normalization.pairing},
                           {"grad_pairing", spec->normalization.grad_pairing}};
    run.write_field("e1.txt", spec->e1);
    run.write_field("e2.txt", spec->e2);
    run.write_field("z_mode.txt", spec->z_mode);
  } else {
    sj["lambda1"] = nullptr;
    sj["failure"] = failure;
  }
  run.write("spectral.json", dump(sj));

  const auto id = spec ? identity_suite(ops, *spec, pairs, seed) : identity_suite(ops, pairs, seed);
  run.write("identities.json", dump(identities_json(id, spec.has_value())));

  if (mode != "skip") {
    json cj;
    auto want = [&](const char* name) { return mode == "all" || mode == name; };
    if (want("none")) cj["none"] = coercivity_estimate(ops, ConstraintSet::none);
    if (want("modulation")) cj["modulation"] = coercivity_estimate(ops, ConstraintSet::modulation);
    if (want("y-perp")) {
      cj["y_perp"] = spec ? json(coercivity_estimate(ops, *spec, ConstraintSet::y_perp)) : json(nullptr);
    }
    run.write("coercivity.json", dump(cj));
  }
  if (!spec) {
    std::cerr << failure << '\n';
    return exit_code(ErrorKind::spectral_failure);
  }
  say("lambda1 " + format_double(spec->lambda1) + "  SiE residuals " + format_double(spec->sie_residual1) + " " +
      format_double(spec->sie_residual2));
  return 0;
}

int cmd_construct(Run& run) {
  const double a = run.num("a");
  const double kk = run.num("k");
  if (!(kk >= 1.0) || kk != std::floor(kk)) throw Error(ErrorKind::invalid_argument, "k must be an integer >= 1");
  const int k = static_cast<int>(kk);
  const auto p = solve_ground_state(run.num("omega"), grid_of(run));
  const auto ops = assemble(p);
  const auto spec = internal_mode(ops);
  const ResolventContext ctx(ops, spec.lambda1);
  const auto series = build_series(a, k, spec, ctx);
  const double lam = spec.lambda1;
  const double t0 = t0_of(run, "t0", lam);

  json sj = json::parse(series_manifest_json(series));
  sj["t0"] = t0;
  sj["solve_residuals"] = series.solve_residuals;
  std::vector<double> norms;
  for (std::size_t j = 0; j < series.coefficients.size(); ++j) {
    norms.push_back(h1_norm_v(ops, series.v[j]));
    run.write_field("series/g_" + std::to_string(j + 1) + ".txt", series.coefficients[j]);
  }
  sj["coefficient_h1"] = norms;
  run.write("series.json", dump(sj));

  const double from = run.num("fit_from"), to = run.num("fit_to");
  const std::size_t points = run.count("fit_points");
  if (!(to > from) || points < 2) throw Error(ErrorKind::invalid_argument, "fit window needs fit_to > fit_from, 2+ points");
  std::vector<double> tg;
  for (std::size_t i = 0; i < points; ++i) tg.push_back((from + (to - from) * i / (points - 1)) / lam);
  const auto rp = residual_decay(series, ops, tg);
  run.write("residual.csv", residual_csv(rp, lam));
  json rj{{"k", k},
          {"fitted_slope", rp.fitted_slope},
          {"expected_slope", rp.expected_slope},
          {"ratio", rp.expected_slope != 0.0 ? rp.fitted_slope / rp.expected_slope : 0.0},
          {"window_t_lambda", {rp.fit_end > 0 ? tg[rp.fit_begin] * lam : 0.0, rp.fit_end > 0 ? tg[rp.fit_end - 1] * lam : 0.0}},
          {"full_window", rp.full_window}};
  run.write("residual.json", dump(rj));

  std::optional<RadialGrid> target;
  if (run.str("target_n") != "same") target = make_grid(run.num("target_r_max"), run.count("target_n"));
  const auto id = initial_data(series, ops, p, t0, target);
  run.write_field("initial.txt", id.u);
  const auto fr = functionals(id.u);
  json ij{{"t0", id.t0},
          {"w_h1", id.w_h1},
          {"mass_offset", id.mass_offset},
          {"mass_offset_rel", id.mass_offset / p.norms.mass},
          {"energy_offset", id.energy_offset},
          {"leading_error", id.leading_error},
          {"leading_bound", std::exp(-1.5 * lam * t0)},
          {"virial", fr.virial},
          {"grad_sq_minus_P", fr.grad_sq() - p.norms.grad_sq}};
  run.write("initial.json", dump(ij));
  say("lambda1 " + format_double(lam) + "  residual slope " + format_double(rp.fitted_slope) + " (expected " +
      format_double(rp.expected_slope) + ")  t0 " + format_double(t0));
  return 0;
}

int cmd_evolve(Run& run) {
  const double omega = run.num("omega");
  const auto builtin = run.str("builtin");
  const auto input = run.str("input");
  std::optional<RadialField> u0;
  double t_start = 0.0, t_end = 20.0;
  std::optional<SolitonProfile> profile;

  if (!input.empty()) {
    std::ifstream is(input);
    if (!is) throw Error(ErrorKind::io, "cannot open " + input);
    u0 = read_field(is);
    profile = solve_ground_state(omega, u0->grid());
  } else if (builtin == "soliton") {
    profile = solve_ground_state(omega, grid_of(run));
    u0 = RadialField::real(profile->field.grid(), profile->field.real_part());
  } else if (builtin == "threshold") {
    const auto lp = solve_ground_state(omega, grid_of(run, "lin_"));
    const auto ops = assemble(lp);
    const auto spec = internal_mode(ops);
    const ResolventContext ctx(ops, spec.lambda1);
    const auto series = build_series(run.num("a"), static_cast<int>(run.count("k")), spec, ctx);
    const double t0 = t0_of(run, "t0", spec.lambda1);
    const auto grid = grid_of(run);
    u0 = initial_data(series, ops, lp, t0, grid).u;
    profile = solve_ground_state(omega, grid);
    t_start = t0;
    t_end = t0 - 2000.0;
  } else {
    throw Error(ErrorKind::invalid_argument, "builtin must be soliton or threshold (or pass --input)");
  }

  EvolutionConfig cfg;
  cfg.dt = run.num("dt");
  cfg.t_start = run.str("t_start") == "auto" ? t_start : run.num("t_start");
  cfg.t_end = run.str("t_end") == "auto" ? t_end : run.num("t_end");
  cfg.layer_width = run.num("layer_width");
  cfg.layer_strength = run.num("layer_strength");
  cfg.record_every = run.count("record_every");
  cfg.snapshot_every = run.count("snapshot_every");
  cfg.virial_R = run.num("virial_R");
  cfg.nonlinear = run.flag("nonlinear");
  const auto traj = evolve(*u0, cfg, &*profile);

  run.write("diagnostics.csv", diagnostics_csv(traj));
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshots/snap_%05zu.txt", i);
    run.write_field(name, traj.snapshots[i]);
  }
  run.write_field("final.txt", traj.final_state);
  const auto verdict = scattering_indicator(traj, &*profile);
  run.write("verdict.json", verdict_json(verdict));
  const auto gc = gradient_comparison(traj, *profile);
  const auto fit = convergence_rate(traj, *profile, run.num("tube"));
  json gj{{"all_negative", gc.all_negative},
          {"all_positive", gc.all_positive},
          {"sign_changes", gc.sign_changes},
          {"first_diff", gc.diff.empty() ? 0.0 : gc.diff.front()},
          {"rate", fit.rate},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"fit_rows", {fit.begin, fit.end}},
          {"degenerate", fit.degenerate}};
  gj["exit_time"] = fit.exit_time ? json(*fit.exit_time) : json(nullptr);
  run.write("summary.json", dump(gj));
  say("verdict " + verdict.verdict + "  L4 drop " + format_double(verdict.l4_drop) + "  min V " +
      format_double(verdict.min_virial));
  return 0;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"groundstate", "Ground state P_omega, its identities and the rescaled soliton",
       {{"omega", "0.1"}, {"r_max", "120"}, {"n", "6001"}}, cmd_groundstate},
      {"phasediagram", "Soliton family sweep and the mass-energy boundary curves",
       {{"omega_min", "0.02"}, {"omega_max", "0.18"}, {"count", "60"}, {"r_max", "120"}, {"n", "6001"},
        {"workers", "1"}},
       cmd_phasediagram},
      {"spectrum", "Internal mode of the linearized operator, identities and coercivity",
       {{"omega", "0.015"}, {"r_max", "200"}, {"n", "1001"}, {"coercivity", "all"}, {"pairs", "50"}, {"seed", "7"}},
       cmd_spectrum},
      {"construct", "Exponential series, residual decay and threshold initial data",
       {{"omega", "0.015"}, {"r_max", "200"}, {"n", "1001"}, {"a", "1"}, {"k", "4"}, {"t0", "auto"},
        {"fit_from", "4"}, {"fit_to", "12"}, {"fit_points", "17"}, {"target_r_max", "400"}, {"target_n", "same"}},
       cmd_construct},
      {"evolve", "Split-step evolution with diagnostics and a scattering verdict",
       {{"input", ""}, {"builtin", "soliton"}, {"omega", "0.015"}, {"r_max", "200"}, {"n", "1001"},
        {"lin_r_max", "200"}, {"lin_n", "1001"}, {"a", "1"}, {"k", "4"}, {"t0", "auto"}, {"dt", "0.0025"},
        {"t_start", "auto"}, {"t_end", "auto"}, {"layer_width", "0"}, {"layer_strength", "1"},
        {"record_every", "20"}, {"snapshot_every", "0"}, {"virial_R", "inf"}, {"nonlinear", "true"},
        {"tube", "0.3"}},
       cmd_evolve},
      {"check", "Full identity and acceptance battery", {{"seed", "20240601"}}, cmd_check},
  };
  return list;
}

}  // namespace cqnls::cli
