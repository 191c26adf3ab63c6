// swelm: train sparse-weight ELM surrogates on benchmark models and compute
// variance-based sensitivity indices in closed form.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swelm/swelm.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed_override, "override master_seed");
  cmd->add_option("--out", args.out_override, "override output_dir");
}

swelm::RunConfig load(const CommonArgs& args) {
  swelm::RunConfig config = swelm::load_run_config(args.config_path);
  if (args.seed_override) config.master_seed = *args.seed_override;
  if (args.out_override) config.output_dir = *args.out_override;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-weight ELM surrogates with analytic Sobol' indices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", swelm::version_string);

  CommonArgs generate_args, gsa_args, compare_args, truth_args;
  CLI::App* generate =
      app.add_subcommand("generate", "sample a design and evaluate the model into CSV datasets");
  add_common(generate, generate_args);
  CLI::App* gsa = app.add_subcommand(
      "gsa", "run the sparsification sweep and write analytic Sobol' indices");
  add_common(gsa, gsa_args);
  CLI::App* compare =
      app.add_subcommand("compare", "cross-check analytic indices against Monte Carlo");
  add_common(compare, compare_args);
  CLI::App* truth = app.add_subcommand("truth", "write closed-form reference indices");
  add_common(truth, truth_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      swelm::run_generate(load(generate_args));
    } else if (gsa->parsed()) {
      swelm::run_gsa(load(gsa_args));
    } else if (compare->parsed()) {
      swelm::run_compare(load(compare_args));
    } else if (truth->parsed()) {
      swelm::run_truth(load(truth_args));
    }
  } catch (const swelm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const swelm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const swelm::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
