// Command line front end: run a configured simulation, check a finished run
// directory, plot a series column, or materialize a bundled demo config.

#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "vp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"1.5-dimensional Vlasov-Poisson simulator and verification harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run = app.add_subcommand("run", "execute a run into an output directory");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (default: <config stem>_run)");

  std::string check_dir, theorems;
  CLI::App* check = app.add_subcommand("check", "verify the growth laws on a run directory");
  check->add_option("dir", check_dir, "run directory")->required();
  check->add_option("--theorems", theorems, "comma list (default: all applicable)");

  std::string plot_dir, quantity, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "render one series column as SVG");
  plot->add_option("dir", plot_dir, "run directory")->required();
  plot->add_option("--quantity", quantity, "series column name")->required();
  plot->add_option("--out", plot_out, "output file (default: <dir>/plot_<quantity>.svg)");

  std::string demo_name, demo_out;
  CLI::App* demo = app.add_subcommand("demo", "write a bundled demo config");
  demo->add_option("name", demo_name,
                   "rvp_small, vp_small, rvpn_pair, vpn_pair, freestream_sanity")
      ->required();
  demo->add_option("--out", demo_out, "output file (default: <name>.cfg)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (out_dir.empty()) {
      std::string stem = std::filesystem::path(config_path).stem().string();
      out_dir = (stem.empty() ? std::string("run") : stem) + "_run";
    }
    return vp::cmd_run(config_path, out_dir);
  }
  if (check->parsed()) return vp::cmd_check(check_dir, theorems);
  if (plot->parsed()) return vp::cmd_plot(plot_dir, quantity, plot_out);
  if (demo->parsed()) return vp::cmd_demo(demo_name, demo_out);
  return 2;
}
