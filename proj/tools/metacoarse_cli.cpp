#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metacoarse/interchange.hpp"
#include "metacoarse/log.hpp"
#include "metacoarse/pipeline.hpp"
#include "metacoarse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace metacoarse;

namespace {

// Flags shared by `run` and `sweep`; each one overrides the config file.
struct RunFlags {
  std::string config_path;
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<std::string> method;
  std::optional<double> ratio;
  std::optional<double> epsilon;
  std::optional<std::size_t> ig_steps;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> hidden;
  std::optional<double> learning_rate;
  std::optional<double> dropout;
  std::optional<double> train_fraction;
  std::optional<double> val_fraction;
  bool no_dedup = false;
  std::uint64_t seed = 0;

  void attach(CLI::App* app, bool with_method) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--input", input, "interchange file with CFG samples");
    app->add_option("--out", output, "output directory");
    if (with_method) {
      app->add_option("--method", method, "identity, kron or variation_edges");
      app->add_option("--ratio", ratio, "coarsening ratio r in [0, 1)");
    }
    app->add_option("--epsilon", epsilon, "TES node budget fraction");
    app->add_option("--ig-steps", ig_steps, "integrated gradients steps");
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    app->add_option("--hidden", hidden, "hidden dimension");
    app->add_option("--lr", learning_rate, "Adam learning rate");
    app->add_option("--dropout", dropout);
    app->add_option("--train-fraction", train_fraction);
    app->add_option("--val-fraction", val_fraction, "validation share of the train pool");
    app->add_flag("--no-dedup", no_dedup, "keep isomorphic duplicates");
    app->add_option("--seed", seed, "seed for split, initialization and shuffling")->required();
  }

  RunConfig apply(RunConfig c) const {
    if (input) c.input = *input;
    if (output) c.output_dir = *output;
    if (method) {
      const auto m = parse_coarsening_method(*method);
      if (!m) throw CLI::ValidationError("--method", "unknown coarsening method " + *method);
      c.method = *m;
    }
    if (ratio) c.ratio = *ratio;
    if (epsilon) c.epsilon = *epsilon;
    if (ig_steps) c.ig_steps = *ig_steps;
    if (epochs) c.train.epochs = *epochs;
    if (batch_size) c.train.batch_size = *batch_size;
    if (hidden) c.train.hidden_dim = *hidden;
    if (learning_rate) c.train.learning_rate = *learning_rate;
    if (dropout) c.train.dropout = *dropout;
    if (train_fraction) c.train_fraction = *train_fraction;
    if (val_fraction) c.val_fraction = *val_fraction;
    if (no_dedup) c.dedup = false;
    c.seed = seed;
    return c;
  }

  RunConfig build() const { return apply(config_path.empty() ? RunConfig{} : RunConfig::load(config_path)); }
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("--grid", "empty list");
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarsen, explain and backtrack CFG malware classifiers"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");

  auto* generate = app.add_subcommand("generate", "write a planted-motif synthetic dataset");
  std::size_t count = 200;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  double malicious_fraction = 0.5;
  generate->add_option("--count", count, "number of samples");
  generate->add_option("--seed", gen_seed)->required();
  generate->add_option("--out", gen_out, "output interchange file")->required();
  generate->add_option("--malicious-fraction", malicious_fraction);

  auto* run = app.add_subcommand("run", "run the full pipeline for one configuration");
  RunFlags run_flags;
  run_flags.attach(run, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "baseline plus every method x ratio");
  RunFlags sweep_flags;
  sweep_flags.attach(sweep_cmd, false);
  std::string methods_text = "kron,variation_edges";
  std::string ratios_text = "0.25,0.5,0.75,0.999";
  std::vector<std::string> config_files;
  sweep_cmd->add_option("--methods", methods_text, "comma-separated coarseners");
  sweep_cmd->add_option("--ratios", ratios_text, "comma-separated r values");
  sweep_cmd->add_option("--configs", config_files, "explicit run configs instead of the grid")
      ->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "re-aggregate metrics from a run directory");
  std::string report_dir;
  report->add_option("--run", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  auto* curves = app.add_subcommand("curves", "sparsity vs characterization over an epsilon grid");
  std::string curves_dir, curves_level = "upper", grid_text = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
  std::string curves_out;
  curves->add_option("--run", curves_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  curves->add_option("--level", curves_level, "upper ((C-)CFG) or lower (B-AFG)")
      ->check(CLI::IsMember({"upper", "lower"}));
  curves->add_option("--grid", grid_text, "comma-separated epsilon values");
  curves->add_option("--out", curves_out, "write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  set_log_sink([verbose](LogLevel level, std::string_view msg) {
    if (level == LogLevel::kWarning || verbose) std::cerr << (level == LogLevel::kWarning ? "warning: " : "") << msg << '\n';
  });

  try {
    if (*generate) {
      SyntheticSpec spec = SyntheticSpec::planted_cycle();
      spec.malicious_fraction = malicious_fraction;
      save_samples(gen_out, generate_synthetic(count, spec, gen_seed));
      std::cout << "wrote " << count << " samples to " << gen_out << '\n';
    } else if (*run) {
      const RunConfig config = run_flags.build();
      if (config.input.empty() || config.output_dir.empty()) throw std::invalid_argument("--input and --out are required");
      const RunOutcome outcome = run_pipeline(config);
      std::cout << outcome.report.to_json() << '\n';
    } else if (*sweep_cmd) {
      std::vector<RunConfig> configs;
      if (!config_files.empty()) {
        for (const std::string& path : config_files) {
          RunConfig c = sweep_flags.apply(RunConfig::load(path));
          const RunConfig raw = RunConfig::load(path);
          if (raw.seed != 0 && raw.seed != sweep_flags.seed) {
            throw std::invalid_argument(path + " uses seed " + std::to_string(raw.seed) + ", sweep seed is " +
                                        std::to_string(sweep_flags.seed));
          }
          configs.push_back(std::move(c));
        }
      } else {
        const RunConfig base = sweep_flags.build();
        if (base.input.empty() || base.output_dir.empty()) throw std::invalid_argument("--input and --out are required");
        std::vector<CoarseningMethod> methods;
        std::stringstream in(methods_text);
        std::string item;
        while (std::getline(in, item, ',')) {
          const auto m = parse_coarsening_method(item);
          if (!m) throw std::invalid_argument("unknown coarsening method " + item);
          methods.push_back(*m);
        }
        configs = sweep_grid(base, methods, parse_grid(ratios_text));
      }
      const SweepResult result = sweep(configs);
      const fs::path root = sweep_flags.output ? fs::path(*sweep_flags.output) : configs.front().output_dir.parent_path();
      fs::create_directories(root);
      write_file(root / "inference_table.tsv", result.inference_table());
      write_file(root / "explainability_table.tsv", result.explainability_table());
      std::cout << result.inference_table() << '\n' << result.explainability_table();
      std::cout << "trained models: " << result.trained_models << '\n';
    } else if (*report) {
      std::cout << report_from_run(report_dir).to_json() << '\n';
    } else if (*curves) {
      const std::string table = curve_table(curves_from_run(curves_dir, curves_level == "upper", parse_grid(grid_text)));
      if (curves_out.empty()) {
        std::cout << table;
      } else {
        write_file(curves_out, table);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
