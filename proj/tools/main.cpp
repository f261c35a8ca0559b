#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "addgp/error.hpp"
#include "addgp/experiment.hpp"

namespace {

struct CliState {
  addgp::ExperimentConfig config;
  std::string data;
  std::vector<std::string> models{"nn", "gp", "nam", "agp"};
  std::vector<std::size_t> synthetic;
  std::vector<std::string> label_map;
  std::string tying = "independent";
};

void add_common(CLI::App& cmd, CliState& s) {
  auto& c = s.config;
  cmd.add_option("--data", s.data, "Headered CSV with numeric features");
  cmd.add_option("--synthetic", s.synthetic, "Generate an additive synthetic dataset: ROWS FEATURES")
      ->expected(2);
  cmd.add_option("--models", s.models, "Comma-separated subset of nn,gp,nam,agp")->delimiter(',');
  cmd.add_option("--window-proportion", c.online.window_proportion,
                 "Window size / training data size")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--al-fraction", c.online.al_fraction, "Share of each batch whose labels are acquired")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--recent-fraction", c.online.recent_fraction,
                 "Share of the window reserved for the newest samples")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--batch-min", c.online.batch_range.min, "Smallest stream batch")->check(CLI::PositiveNumber);
  cmd.add_option("--batch-max", c.online.batch_range.max, "Largest stream batch")->check(CLI::PositiveNumber);
  cmd.add_option("--retrain-every", c.online.retrain_every, "Retrain after this many batches")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--test-fraction", c.test_fraction, "Held-out share of all rows")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--initial-fraction", c.initial_fraction, "Initial-window share of the remaining rows")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--seed", c.online.seed, "Seed for splitting, windows and model init");
  cmd.add_option("--repeat-seeds", c.repeat_seeds, "Repeat with seeds seed..seed+k-1")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", c.out, "Output directory");
  cmd.add_flag("--standardize", c.standardize, "Z-score features with initial-window statistics");
  cmd.add_flag("--prequential", c.online.prequential, "Score each batch before using its labels");
  cmd.add_option("--label-column", c.load.label_column, "Label column name or index (default: last)");
  cmd.add_option("--label-map", s.label_map, "Label mapping as value:class pairs, e.g. -1:0,1:1")
      ->delimiter(',');
  cmd.add_option("--drop-columns", c.load.drop_columns, "Comma-separated columns to ignore")->delimiter(',');
  cmd.add_option("--initial-budget", c.settings.initial_budget, "Hyperparameter iterations for the first fit");
  cmd.add_option("--retrain-budget", c.settings.retrain_budget, "Hyperparameter iterations per retrain");
  cmd.add_option("--tying", s.tying, "Kernel parameter tying")
      ->check(CLI::IsMember({"independent", "shared-lengthscale", "shared-all"}));
  cmd.add_option("--epochs", c.settings.train.epochs, "Neural training epochs per fit")->check(CLI::PositiveNumber);
  cmd.add_flag("-v,--verbose", c.verbose, "Progress on stderr");
}

void finish_config(CliState& s) {
  auto& c = s.config;
  if (!s.data.empty()) c.data = s.data;
  if (!s.synthetic.empty()) c.synthetic = addgp::SyntheticSpec{s.synthetic[0], s.synthetic[1]};
  c.models.clear();
  for (const auto& m : s.models) c.models.push_back(addgp::parse_model_kind(m));
  if (!s.label_map.empty()) {
    c.load.label_mapping.clear();
    for (const auto& pair : s.label_map) {
      const auto colon = pair.rfind(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
        throw addgp::Error(addgp::Errc::kInvalidArgument, "cli: bad --label-map entry '" + pair + "'");
      }
      const std::string cls = pair.substr(colon + 1);
      if (cls != "0" && cls != "1") {
        throw addgp::Error(addgp::Errc::kInvalidArgument, "cli: label class must be 0 or 1 in '" + pair + "'");
      }
      c.load.label_mapping[pair.substr(0, colon)] = cls == "1" ? 1 : 0;
    }
  }
  if (s.tying == "shared-lengthscale") {
    c.settings.tying = addgp::Tying::kSharedLengthscale;
  } else if (s.tying == "shared-all") {
    c.settings.tying = addgp::Tying::kSharedAll;
  }
  c.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online interpretable classification experiments (nn, gp, nam, agp)"};
  app.require_subcommand(1);
  CliState s;

  auto* run = app.add_subcommand("run", "Compare models on one online run");
  add_common(*run, s);

  auto* sw = app.add_subcommand("sweep-window", "Repeat the run over window proportions");
  add_common(*sw, s);
  sw->add_option("--window-grid", s.config.window_grid, "Comma-separated proportions")->delimiter(',');

  auto* sa = app.add_subcommand("sweep-al", "Repeat the run over acquisition fractions");
  add_common(*sa, s);
  sa->add_option("--al-grid", s.config.al_grid, "Comma-separated fractions")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    finish_config(s);
  } catch (const addgp::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (run->parsed()) {
      addgp::cmd_run(s.config);
    } else if (sw->parsed()) {
      addgp::cmd_sweep_window(s.config);
    } else {
      addgp::cmd_sweep_al(s.config);
    }
  } catch (const addgp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << s.config.out.string() << "\n";
  return 0;
}
