#include <CLI11.hpp>

#include <iostream>

#include "vss/pipeline.hpp"

using namespace vss;

int main(int argc, char** argv) {
  CLI::App app{"Viscous shock stability pipeline"};
  std::string sub, config, out = "vss_out";
  pipeline::RunOptions opt;
  app.add_option("subcommand", sub, "Stage to run")->required()->check(CLI::IsMember(pipeline::subcommands()));
  app.add_option("--config", config, "Configuration file (JSON)")->required();
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-profile", opt.tolerance_profile, "strict or default")
      ->check(CLI::IsMember({"strict", "default"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pipeline::Error;
  }

  try {
    const json cfg = pipeline::merge_config(pipeline::load_config(config), opt);
    const auto result = pipeline::run(sub, cfg, opt);
    pipeline::write_output(result, out);
    std::cout << sub << ": exit " << result.exit_code << " (" << out << "/report.json)\n";
    return result.exit_code;
  } catch (const pipeline::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return pipeline::Error;
}
