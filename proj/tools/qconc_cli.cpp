// qconc command-line runner: run / validate / plot.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or usage.

#include <qconc/config.hpp>
#include <qconc/experiment.hpp>
#include <qconc/plots.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kInvalidConfig = 2;

struct Source {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_source_options(CLI::App* cmd, Source& src) {
  auto* cfg = cmd->add_option("--config", src.config_path, "JSON experiment configuration");
  auto* pre = cmd->add_option("--preset", src.preset_name, "built-in preset name");
  cfg->excludes(pre);
  cmd->add_option("--seed", src.seed, "override the master seed");
  cmd->add_option("--out", src.out, "override the output directory");
}

qconc::ExperimentConfig resolve(const Source& src) {
  if (src.config_path.empty() == src.preset_name.empty()) {
    throw qconc::ConfigError("", "exactly one of --config or --preset is required");
  }
  auto cfg = src.config_path.empty() ? qconc::preset(src.preset_name) : qconc::load_config(src.config_path);
  if (src.seed) cfg.seed = *src.seed;
  if (!src.out.empty()) cfg.output_dir = src.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qconc: exponential-concentration experiments for variational training"};
  app.set_version_flag("--version", std::string(QCONC_VERSION));
  app.require_subcommand(1);

  Source run_src;
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  bool no_plots = false;
  auto* run = app.add_subcommand("run", "execute an experiment and write its artifacts");
  add_source_options(run, run_src);
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-plots", no_plots, "skip SVG rendering");

  Source val_src;
  auto* validate = app.add_subcommand("validate", "check a configuration and print it fully resolved");
  add_source_options(validate, val_src);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "render SVG plots for a completed run");
  plot->add_option("--out", plot_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidConfig;
  }

  try {
    if (*validate) {
      const auto cfg = resolve(val_src);
      std::cout << qconc::normalized_config_text(cfg);
      return kOk;
    }
    if (*run) {
      const auto cfg = resolve(run_src);
      qconc::RunOptions options;
      options.workers = workers;
      const auto result = qconc::run_experiment(cfg, options);
      for (const auto& e : result.errors) std::cerr << "error: " << e << '\n';
      if (!result.ok()) {
        std::cerr << "run failed; partial artifacts kept in " << result.output_dir.string() << '\n';
        return kRuntimeFailure;
      }
      if (!no_plots) qconc::emit_plots(result.output_dir);
      std::cout << "wrote " << result.files.size() << " artifacts to " << result.output_dir.string() << '\n';
      return kOk;
    }
    if (*plot) {
      const auto files = qconc::emit_plots(plot_dir);
      for (const auto& f : files) std::cout << f << '\n';
      return kOk;
    }
  } catch (const qconc::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}
