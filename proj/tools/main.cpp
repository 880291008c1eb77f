#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdlib>
#include <fftw3.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "cqnls/error.hpp"

using namespace cqnls;
using namespace cqnls::cli;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

json versions() {
  return json{{"cqnls", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"fftw", std::string(fftw_version)},
              {"boost", BOOST_LIB_VERSION}};
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// defaults < config file < explicit flags
KeyValues resolve(const Command& c, const std::string& config, const KeyValues& flags) {
  KeyValues kv = c.defaults;
  if (!config.empty()) {
    for (const auto& [k, v] : parse_key_values(read_text(config))) {
      if (!kv.count(k)) throw Error(ErrorKind::invalid_argument, "unknown key '" + k + "' in " + config);
      kv[k] = v;
    }
  }
  for (const auto& [k, v] : flags) kv[k] = v;
  return kv;
}

int execute(const Command& c, const KeyValues& params, const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  Run run(out, params);
  const int code = c.run(run);
  json m{{"command", c.name}, {"parameters", params}, {"outputs", run.outputs()},
         {"exit_code", code}, {"versions", versions()}};
  {
    std::ofstream os(fs::path(out) / "manifest.json", std::ios::binary);
    os << m.dump(2) << '\n';
    if (!os) throw Error(ErrorKind::io, "cannot write manifest");
  }
  // Wall time is kept apart from the manifest so that reruns stay byte-identical.
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream ts(fs::path(out) / "timing.json", std::ios::binary);
  ts << json{{"wall_seconds", wall}}.dump() << '\n';
  return code;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::invalid_argument, "unknown command '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cubic-quintic NLS soliton, spectral and threshold-dynamics laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const char* env_out = std::getenv("CQNLS_OUT");
  struct Sub {
    const Command* command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::string config;
    std::string out;
  };
  std::vector<Sub> subs;
  subs.reserve(commands().size());
  for (const auto& c : commands()) {
    subs.push_back({&c, app.add_subcommand(c.name, c.help), {}, {}, env_out ? env_out : "out/" + c.name});
  }
  for (auto& s : subs) {
    for (const auto& [key, def] : s.command->defaults) {
      s.app->add_option("--" + key, s.values[key], "default: " + (def.empty() ? std::string("(none)") : def));
    }
    s.app->add_option("--config", s.config, "flat key = value file; flags override it");
    s.app->add_option("--out", s.out, "output directory")->capture_default_str();
  }
  std::string manifest_path, replay_out = "out/replay";
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest.json");
  replay->add_option("manifest", manifest_path, "manifest.json written by an earlier run")->required();
  replay->add_option("--out", replay_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      json m;
      try {
        m = json::parse(read_text(manifest_path));
      } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_argument, std::string("bad manifest: ") + e.what());
      }
      const auto& c = find_command(m.at("command").get<std::string>());
      KeyValues params;
      for (const auto& [k, v] : m.at("parameters").items()) params[k] = v.get<std::string>();
      return execute(c, resolve(c, "", params), replay_out);
    }
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      KeyValues flags;
      for (const auto& [key, def] : s.command->defaults) {
        if (s.app->get_option("--" + key)->count() > 0) flags[key] = s.values[key];
      }
      return execute(*s.command, resolve(*s.command, s.config, flags), s.out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
