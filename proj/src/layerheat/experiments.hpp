#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "layerheat/geometry.hpp"

namespace layerheat::experiments {

struct ExperimentConfig {
  std::string experiment;
  std::string shape_path;  // empty: unit circle (pullback-weak: the built-in trio)
  int N = 64;
  int M = 32;
  double T = 1.0;
  double alpha = 0.5;
  double delta = 0.3;
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  // Throws Error(parse) naming the key on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  // key = value lines, '#' comments
  void load_file(const std::string& path);
  void validate() const;
};

const std::vector<std::string>& experiment_names();

enum ExitStatus { exit_ok = 0, exit_tolerance = 1, exit_config = 2 };

// Settings are applied in order, then the config file (which overrides them),
// then validated and the shape loaded; failures up to there give exit_config.
// Writes <out>/<experiment>.csv (and .svg where a plot exists); a one-line
// summary per check goes to log.
int run(const std::string& experiment, const std::vector<std::pair<std::string, std::string>>& settings,
        const std::string& config_file, std::ostream& log);

}  // namespace layerheat::experiments
