// Experiment driver: generate boundaries, solve the degenerate operators,
// evaluate the Carleson functionals and geometric diagnostics.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "urlab/experiment.hpp"

using namespace urlab;

namespace {

int run_verb(const std::string& verb, const std::string& config_path, const std::string& out_dir,
             const std::string& h_override, int threads) {
  try {
    ExperimentConfig cfg = ExperimentConfig::parse_file(config_path);
    if (!h_override.empty()) cfg.set("grid.h", h_override);
    if (threads > 1) cfg.set("threads", std::to_string(threads));
    const ExperimentResult res = run_experiment(cfg, verb, out_dir);
    if (res.exit_code != 0) {
      std::cerr << "error (" << verb << "): " << res.message << "\n";
      return res.exit_code;
    }
    std::cout << res.bundle_dir << "\n";
    for (const std::string& f : res.files) std::cout << "  " << f << "\n";
    return 0;
  } catch (const ParameterError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

int run_report(const std::string& bundle) {
  std::ifstream in(bundle + "/manifest.txt");
  if (!in) {
    std::cerr << "validation error: no manifest in " << bundle << "\n";
    return 2;
  }
  std::cout << in.rdbuf();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urlab: smooth distances, degenerate Green functions and Carleson diagnostics"};
  app.set_help_flag("--help", "print help");  // frees -h/--h for the spacing flag
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", h_override, bundle;
  int threads = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    sub->set_help_flag("--help", "print help");
    if (needs_config) sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output root directory");
    sub->add_option("--h", h_override, "override grid spacing");
    sub->add_option("--threads", threads, "worker threads");
  };

  for (const std::string verb : {"gen-boundary", "solve", "functional", "bwgl", "dichotomy"})
    add_common(app.add_subcommand(verb), true);
  app.add_subcommand("report")->add_option("--bundle", bundle, "bundle directory")->required();

  CLI11_PARSE(app, argc, argv);

  const std::string verb = app.get_subcommands().front()->get_name();
  if (verb == "report") return run_report(bundle);
  return run_verb(verb, config_path, out_dir, h_override, threads);
}
