// Command-line front end: run, reproduce-table, oracle.
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
// failure, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mfg/config.hpp"
#include "mfg/errors.hpp"
#include "mfg/experiment.hpp"
#include "mfg/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field decarbonization equilibrium solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mfg::kVersion);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  int oracle_n = 1;

  auto* run = app.add_subcommand("run", "Solve every sweep point x repetition and write the report");
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  run->add_option("--threads", threads, "Worker threads (default: all)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed (overrides model.seed)");

  auto* table = app.add_subcommand("reproduce-table", "Price decomposition table, table.csv");
  table->add_option("--config", config_path, "JSON run configuration")->required();
  table->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  table->add_option("--threads", threads, "Worker threads (default: all)")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "Quadrature reference solution for n in {1, 2}");
  oracle->add_option("--config", config_path, "JSON run configuration")->required();
  oracle->add_option("--n", oracle_n, "Time steps")->required()->check(CLI::IsMember({1, 2}));
  oracle->add_option("--out", out_dir, "Output directory (overrides out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) mfg::set_threads(threads);
    const mfg::RunConfig config = mfg::load_config(config_path);
    mfg::RunOptions options;
    if (out_dir) options.out_dir = *out_dir;
    options.seed = seed;

    if (*run) {
      const auto report = mfg::run(config, options);
      const auto dir = options.out_dir ? *options.out_dir : std::filesystem::path(config.out_dir);
      for (const auto& p : report["points"]) {
        std::cout << "gamma=" << p["gamma_pen"].get<double>() << " lambda=" << p["lambda"].get<double>()
                  << " rho=" << p["rho"].get<double>() << "  P1=" << p["P1"].get<double>() << " ± "
                  << p["P1_se"].get<double>() << "  P2=" << p["P2"].get<double>() << " ± "
                  << p["P2_se"].get<double>() << '\n';
      }
      std::cout << "report: " << (dir / "report.json").string() << '\n';
    } else if (*table) {
      const auto entries = mfg::reproduce_table(config, options);
      std::cout << mfg::table_csv(entries);
    } else if (*oracle) {
      const auto report = mfg::run_oracle(config, oracle_n, options);
      const auto& p = report["points"][0];
      std::cout << "oracle n=" << oracle_n << "  P1=" << p["P1"].get<double>()
                << "  P2=" << p["P2"].get<double>()
                << "  mean psi_bar=" << p["psi_bar"]["mean"].get<double>() << '\n';
    }
  } catch (const mfg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mfg::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mfg::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
