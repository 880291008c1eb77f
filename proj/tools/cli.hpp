#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqnls/format.hpp"
#include "cqnls/radial.hpp"

namespace cqnls::cli {

namespace fs = std::filesystem;

/// Output sink of one command: every file goes below `out`, and the list of
/// written names ends up in the manifest.
class Run {
 public:
  Run(fs::path out, KeyValues params);

  const KeyValues& params() const noexcept { return params_; }
  const fs::path& out() const noexcept { return out_; }
  const std::vector<std::string>& outputs() const noexcept { return outputs_; }

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;

  void write(const std::string& name, const std::string& content);
  void write_field(const std::string& name, const RadialField& f);

 private:
  fs::path out_;
  KeyValues params_;
  std::vector<std::string> outputs_;
};

/// Stdout line for the user; commands print a short summary.
void say(const std::string& line);

struct Command {
  std::string name;
  std::string help;
  KeyValues defaults;
  int (*run)(Run&);
};

const std::vector<Command>& commands();

int cmd_groundstate(Run& run);
int cmd_phasediagram(Run& run);
int cmd_spectrum(Run& run);
int cmd_construct(Run& run);
int cmd_evolve(Run& run);
int cmd_check(Run& run);

/// Exit code of `check` when the battery ran but some criterion failed.
inline constexpr int kCriteriaFailed = 1;

}  // namespace cqnls::cli
