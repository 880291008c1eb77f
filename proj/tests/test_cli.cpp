#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path& work() {
  static const fs::path w = [] {
    fs::path p(CLI_WORKDIR);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return w;
}

// Runs the CLI with `args` and returns its exit status; output goes to a log.
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CQNLS_CLI + "\" " + args + " >> \"" + (work() / "cli.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out(const std::string& name) { return "--out \"" + (work() / name).string() + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json load(const std::string& dir, const std::string& file) { return json::parse(slurp(work() / dir / file)); }

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel.rfind("timing", 0) == 0) continue;
    files[rel] = slurp(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("groundstate") {
  REQUIRE(cli("groundstate --omega 0.1 --r_max 60 --n 1501 " + out("gs1")) == 0);
  REQUIRE(cli("groundstate --omega 0.1 --r_max 60 --n 3001 " + out("gs2")) == 0);
  const auto a = load("gs1", "groundstate.json"), b = load("gs2", "groundstate.json");
  CHECK(std::abs(a["beta"].get<double>() - b["beta"].get<double>()) <= 1e-7);
  CHECK(b["pohozaev"]["max"].get<double>() <= 1e-6);
  CHECK(fs::exists(work() / "gs1" / "profile.txt"));
  CHECK(fs::exists(work() / "gs1" / "rescaled.txt"));
  const auto m = load("gs1", "manifest.json");
  CHECK(m["command"] == "groundstate");
  CHECK(m["exit_code"] == 0);
  CHECK(m["parameters"]["n"] == "1501");
  CHECK(m["versions"].contains("fftw"));

  CHECK(cli("groundstate --omega 0.2 " + out("gs_bad")) == 2);
  CHECK(cli("groundstate --omega abc " + out("gs_bad")) == 2);
  CHECK(cli("groundstate --no_such_flag 1 " + out("gs_bad")) == 2);
  CHECK(cli("nonsense") == 2);
}

TEST_CASE("config file and flags") {
  const auto cfg = work() / "gs.cfg";
  std::ofstream(cfg) << "# ground state\nomega = 0.12\nr_max = 60\nn = 1501\n";
  REQUIRE(cli("groundstate --config \"" + cfg.string() + "\" " + out("cfg1")) == 0);
  CHECK(load("cfg1", "groundstate.json")["omega"].get<double>() == 0.12);
  REQUIRE(cli("groundstate --config \"" + cfg.string() + "\" --omega 0.09 " + out("cfg2")) == 0);
  CHECK(load("cfg2", "groundstate.json")["omega"].get<double>() == 0.09);
  CHECK(load("cfg2", "groundstate.json")["n"].get<int>() == 1501);
  const auto bad = work() / "bad.cfg";
  std::ofstream(bad) << "colour = blue\n";
  CHECK(cli("groundstate --config \"" + bad.string() + "\" " + out("cfg3")) == 2);
}

TEST_CASE("replay reproduces a run byte for byte") {
  REQUIRE(cli("groundstate --omega 0.08 --r_max 60 --n 1501 " + out("rp1")) == 0);
  REQUIRE(cli("replay \"" + (work() / "rp1" / "manifest.json").string() + "\" " + out("rp2")) == 0);
  const auto a = tree(work() / "rp1"), b = tree(work() / "rp2");
  CHECK(a.size() >= 4);
  CHECK(a == b);
  CHECK(cli("replay \"" + (work() / "missing.json").string() + "\" " + out("rp3")) == 4);
}

TEST_CASE("phasediagram") {
  const std::string args = "phasediagram --omega_min 0.03 --omega_max 0.15 --count 12 --r_max 60 --n 3001 ";
  REQUIRE(cli(args + out("pd1")) == 0);
  const auto c = load("pd1", "curves.json");
  CHECK(c["m2"].get<double>() > 0.0);
  CHECK(c["m0"].get<double>() <= c["m2"].get<double>());
  CHECK(c["omega_star"].get<double>() == doctest::Approx(0.0547).epsilon(1e-2));
  REQUIRE(cli(args + out("pd2")) == 0);
  CHECK(tree(work() / "pd1") == tree(work() / "pd2"));
  CHECK(cli("phasediagram --omega_min 0.03 --omega_max 0.15 --count 2 --r_max 60 --n 1501 " + out("pd3")) == 2);
  // the default range needs the larger domain at its upper end
  CHECK(cli("phasediagram --count 10 --r_max 30 --n 1501 " + out("pd4")) == 3);
}

TEST_CASE("spectrum") {
  REQUIRE(cli("spectrum --omega 0.015 --coercivity modulation --pairs 4 " + out("sp1")) == 0);
  const auto s = load("sp1", "spectral.json");
  CHECK(s["lambda1"].get<double>() == doctest::Approx(0.0328).epsilon(1e-2));
  CHECK(s["mass_slope"].get<double>() < 0.0);
  CHECK(load("sp1", "coercivity.json")["modulation"].get<double>() > 0.0);
  CHECK(fs::exists(work() / "sp1" / "e1.txt"));
  // no internal mode above the mass minimum
  CHECK(cli("spectrum --omega 0.1 --r_max 80 --n 801 --coercivity skip --pairs 2 " + out("sp2")) == 3);
  const auto f = load("sp2", "spectral.json");
  CHECK(f["lambda1"].is_null());
  CHECK(f["mass_slope"].get<double>() > 0.0);
  CHECK(cli("spectrum --coercivity sideways " + out("sp3")) == 2);
}

TEST_CASE("construct") {
  REQUIRE(cli("construct --k 2 --target_r_max 200 " + out("co1")) == 0);
  const auto r = load("co1", "residual.json");
  CHECK(r["ratio"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fs::exists(work() / "co1" / "series" / "g_2.txt"));
  const auto i = load("co1", "initial.json");
  CHECK(std::abs(i["mass_offset_rel"].get<double>()) <= 1e-4);
  CHECK(i["virial"].get<double>() > 0.0);
  CHECK(cli("construct --k 2 --a 0 --target_r_max 200 " + out("co2")) == 0);
  CHECK(cli("construct --k 0 " + out("co3")) == 2);
  CHECK(cli("construct --k 1.5 " + out("co3")) == 2);
}

TEST_CASE("evolve") {
  REQUIRE(cli("evolve --builtin soliton --omega 0.1 --r_max 80 --n 801 --dt 0.005 --t_end 20 --record_every 100 " +
              out("ev1")) == 0);
  CHECK(load("ev1", "verdict.json")["verdict"] == "soliton-locked");
  CHECK(slurp(work() / "ev1" / "diagnostics.csv").rfind("t,mass,energy,virial", 0) == 0);

  REQUIRE(cli("evolve --builtin threshold --r_max 400 --n 2001 --dt 0.05 --layer_width 80 --snapshot_every 5 " +
              out("ev2")) == 0);
  const auto v = load("ev2", "verdict.json");
  CHECK(v["verdict"] == "dispersing");
  CHECK(v["virial_positive"] == true);
  CHECK(load("ev2", "summary.json")["all_negative"] == true);
  CHECK(fs::exists(work() / "ev2" / "snapshots"));

  // restart from a written state
  const auto final_state = (work() / "ev1" / "final.txt").string();
  CHECK(cli("evolve --input \"" + final_state + "\" --omega 0.1 --dt 0.01 --t_end 20 --record_every 100 " +
            out("ev3")) == 0);
  CHECK(load("ev3", "verdict.json")["verdict"] == "soliton-locked");

  const auto nan_file = work() / "nan.txt";
  {
    std::ofstream os(nan_file);
    os << "# r_max=10 n=16\n";
    for (int i = 0; i < 16; ++i) os << i * 10.0 / 15.0 << ' ' << (i == 3 ? "nan" : "0.5") << " 0\n";
  }
  CHECK(cli("evolve --input \"" + nan_file.string() + "\" " + out("ev4")) == 2);
  CHECK(cli("evolve --input \"" + (work() / "absent.txt").string() + "\" " + out("ev5")) == 4);
  CHECK(cli("evolve --builtin other " + out("ev6")) == 2);
  CHECK(cli("evolve --dt -1 --r_max 80 --n 801 --omega 0.1 " + out("ev7")) == 2);
}
