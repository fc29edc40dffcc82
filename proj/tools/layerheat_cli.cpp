// layerheat <experiment> [--shape F] [--n N] [--m M] [--t-final T] [--alpha A]
//           [--delta D] [--seed S] [--out DIR] [--config FILE]
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "layerheat/layerheat.h"

int main(int argc, char** argv) {
  std::vector<std::string> names;
  for (std::size_t i = 0; const char* n = lh_experiment_name(i); ++i) names.emplace_back(n);

  CLI::App app{"Heat layer potentials on perturbed curves"};
  app.set_version_flag("--version", lh_version());

  std::string experiment;
  app.add_option("experiment", experiment, "one of the built-in experiments")
      ->required()
      ->check(CLI::IsMember(names));

  // option name -> setting key; values are passed through as text and checked by the library
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> flags = {
      {"--shape", "shape", "shape file (default: unit circle)"},
      {"--n", "n", "boundary nodes N, even, >= 8 (default 64)"},
      {"--m", "m", "time steps M, >= 2 (default 32)"},
      {"--t-final", "t-final", "horizon T (default 1)"},
      {"--alpha", "alpha", "Holder exponent in ]0, 1[ (default 0.5)"},
      {"--delta", "delta", "collar half-width (default 0.3)"},
      {"--seed", "seed", "random seed (default 1)"},
      {"--out", "out", "output directory (default .)"},
  };
  std::vector<std::string> values(flags.size());
  std::vector<CLI::Option*> opts;
  for (std::size_t i = 0; i < flags.size(); ++i)
    opts.push_back(app.add_option(flags[i].name, values[i], flags[i].help));
  std::string config;
  auto* config_opt = app.add_option("--config", config, "key = value file, applied after the flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::vector<const char*> keys, vals;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (opts[i]->count() == 0) continue;
    keys.push_back(flags[i].key);
    vals.push_back(values[i].c_str());
  }
  std::fflush(stdout);
  return lh_experiment_run(experiment.c_str(), keys.data(), vals.data(), keys.size(),
                           config_opt->count() ? config.c_str() : nullptr);
}
