// Acceptance run: executes `cqnls check` twice, judges criteria 1-7 from the
// raw measurements of the first run and criterion 8 by comparing the two
// output trees byte for byte. One line per criterion.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_check(const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = std::string("\"") + CQNLS_CLI + "\" check --out \"" + out.string() + "\" > \"" +
                          (out.string() + ".log") + "\" 2>&1";
  return std::system(cmd.c_str());
}

double num(const json& j, const char* key) { return j.contains(key) && j[key].is_number() ? j[key].get<double>() : NAN; }

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

int failures = 0;

void line(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << "criterion " << id << (ok ? " PASS" : " FAIL") << ": " << detail << '\n';
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel.rfind("timing", 0) == 0) continue;  // wall-clock only
    files[rel] = slurp(e.path());
  }
  return files;
}

}  // namespace

int main() {
  const fs::path work = fs::path(ACCEPTANCE_WORKDIR);
  const fs::path first = work / "check_run1", second = work / "check_run2";
  run_check(first);
  run_check(second);
  if (!fs::exists(first / "check.json")) {
    std::cout << "check produced no check.json; see " << first.string() << ".log\n";
    return 1;
  }
  const json report = json::parse(slurp(first / "check.json"));
  const json timing = json::parse(slurp(first / "timing_criteria.json"));
  std::map<int, json> c;
  for (const auto& e : report["criteria"]) c[e["id"].get<int>()] = e;
  auto secs = [&](int id) { return timing[std::to_string(id)].get<double>(); };
  auto budget = [&](int id, double limit) {
    return std::make_pair(secs(id) <= limit, "runtime " + fmt(secs(id)) + " s <= " + fmt(limit) + " s");
  };

  {
    const auto& j = c[1];
    const auto [tok, tmsg] = budget(1, 60);
    const double ph = num(j, "max_pohozaev"), vp = num(j, "max_virial_P"), vr = num(j, "max_virial_R");
    line(1, ph <= 1e-6 && vp <= 1e-6 && vr <= 1e-6 && num(j, "omegas") == 20 && tok,
         "20 omegas in [0.02, 0.18]; max identity residual " + fmt(ph) + ", |V(P)| " + fmt(vp) + ", |V(R)| " +
             fmt(vr) + " (tol 1e-6); " + tmsg);
  }
  {
    const auto& j = c[2];
    const auto [tok, tmsg] = budget(2, 30);
    const double rel = std::abs(num(j, "q1_l2") - num(j, "p_star_l2")) / num(j, "p_star_l2");
    const double res = num(j, "min_boundh_residual");
    line(2, rel <= 1e-4 && res >= -1e-10 && num(j, "fields") == 200 && tok,
         "||Q1|| vs ||P_omega*|| rel " + fmt(rel) + " (tol 1e-4); min BoundH residual over 200 fields " + fmt(res) +
             " (>= -1e-10); " + tmsg);
  }
  {
    const auto& j = c[3];
    const auto [tok, tmsg] = budget(3, 120);
    const double s1 = num(j, "sie_residual1"), s2 = num(j, "sie_residual2");
    const double sf = num(j, "scaling_form_rel"), fp = num(j, "form_P_rel");
    const double cy = num(j, "coercivity_y_perp"), cm = num(j, "coercivity_modulation"), le = num(j, "lap_e1");
    std::string detail = "omega 0.1: SiE " + fmt(s1) + "/" + fmt(s2) + " (tol 1e-6); scaling form rel " + fmt(sf) +
                         ", F(P) rel " + fmt(fp) + " (tol 1e-5); Y-perp " + fmt(cy) + ", modulation " + fmt(cm) +
                         " (> 0); |int Lap P e1| " + fmt(le) + "; " + tmsg;
    if (j.contains("spectral_failure")) detail += "; " + j["spectral_failure"].get<std::string>();
    line(3, s1 <= 1e-6 && s2 <= 1e-6 && sf <= 1e-5 && fp <= 1e-5 && cy > 0 && cm > 0 && le >= 1e-4 && tok, detail);
  }
  {
    const auto& j = c[4];
    const auto [tok, tmsg] = budget(4, 60);
    bool ok = tok && j["orders"].size() == 3;
    std::string detail = "omega " + fmt(num(j, "omega")) + ", a = 1:";
    for (const auto& o : j["orders"]) {
      const double ratio = num(o, "fitted_slope") / num(o, "expected_slope");
      const auto w = o["window_t_lambda"];
      const bool good = std::abs(ratio - 1.0) <= 0.05 && w[1].get<double>() > w[0].get<double>();
      ok = ok && good;
      detail += " k=" + std::to_string(o["k"].get<int>()) + " ratio " + fmt(ratio) + " over [" +
                fmt(w[0].get<double>()) + ", " + fmt(w[1].get<double>()) + "]/lambda1" +
                (o["full_window"].get<bool>() ? "" : " (floor reached)") + ";";
    }
    line(4, ok, detail + " tol 5%; " + tmsg);
  }
  {
    const auto& j = c[5];
    const auto [tok, tmsg] = budget(5, 120);
    const double sr = num(j, "strang_ratio"), drift = num(j, "mass_drift_per_time");
    const double v1 = num(j, "virial_ratio_inf"), v2 = num(j, "virial_ratio_R5");
    auto in = [](double x) { return x >= 3.5 && x <= 4.5; };
    line(5, in(sr) && drift <= 1e-10 && in(v1) && in(v2) && tok,
         "step-halving ratio " + fmt(sr) + " (in [3.5, 4.5]); mass drift " + fmt(drift) +
             "/unit time (<= 1e-10); virial deviation halving ratios " + fmt(v1) + " (R=inf), " + fmt(v2) +
             " (R=5); " + tmsg);
  }
  {
    const auto& j = c[6];
    const auto [tok, tmsg] = budget(6, 600);
    if (j.contains("error")) {
      line(6, false, j["error"].get<std::string>());
    } else {
      const auto &a = j["a"], &b = j["b"], &cc = j["c"], &d = j["d"];
      const bool ok_a = num(a, "max_abs_deviation") <= 1e-6 && a["verdict"] == "soliton-locked";
      const bool ok_b = b["verdict"] == "dispersing" && num(b, "l4_drop") >= 10 && num(b, "min_virial") > 0 &&
                        b["grad_all_negative"].get<bool>();
      const bool ok_c = num(cc, "min_diff") > 0;
      const bool ok_d = std::abs(num(d, "ratio") - 1.0) <= 0.1;
      line(6, ok_a && ok_b && ok_c && ok_d && tok,
           "(a) | |u|-P | " + fmt(num(a, "max_abs_deviation")) + " (<= 1e-6); (b) " + b["verdict"].get<std::string>() +
               ", L4 drop " + fmt(num(b, "l4_drop")) + ", min V " + fmt(num(b, "min_virial")) +
               ", grad below P: " + (b["grad_all_negative"].get<bool>() ? "yes" : "no") + "; (c) min grad excess " +
               fmt(num(cc, "min_diff")) + " over 1/lambda1; (d) rate/lambda1 " + fmt(num(d, "ratio")) +
               " (within 10%); " + tmsg);
    }
  }
  {
    const auto& j = c[7];
    if (j.contains("error")) {
      line(7, false, j["error"].get<std::string>());
    } else {
      bool ok = num(j, "points") > 0;
      std::string detail = std::to_string(j["points"].get<int>()) + " in-tube snapshots;";
      for (const char* k : {"delta_over_alpha", "delta_over_h", "alpha_over_h"}) {
        const double lo = j[k][0].get<double>(), hi = j[k][1].get<double>();
        ok = ok && lo >= 0.1 && hi <= 10.0;
        detail += std::string(" ") + k + " [" + fmt(lo) + ", " + fmt(hi) + "]";
      }
      line(7, ok, detail + " (bounds [0.1, 10])");
    }
  }
  {
    const auto a = tree(first), b = tree(second);
    std::string diff;
    for (const auto& [name, content] : a) {
      const auto it = b.find(name);
      if (it == b.end() || it->second != content) diff += " " + name;
    }
    for (const auto& [name, content] : b) {
      if (!a.count(name)) diff += " " + name;
    }
    line(8, diff.empty() && !a.empty(),
         std::to_string(a.size()) + " output files compared" + (diff.empty() ? ", all identical" : "; differ:" + diff));
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << '\n';
  return failures == 0 ? 0 : 1;
}
