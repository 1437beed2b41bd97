// medcon: deterministic simulator and analysis toolkit for dynamic median
// consensus on a round-robin switching topology.
//
//   medcon run      --scenario FILE --out DIR [--seed N] [--runs N]
//                   [--strict] [--quantize STEP]
//   medcon sweep    --scenario FILE --out DIR [--seed N] [--runs N] [--strict]
//   medcon validate --scenario FILE [--strict]

#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "medcon/cli.hpp"
#include "medcon/version.hpp"

namespace {

void add_common_flags(CLI::App* cmd, medcon::CliOptions& opt, bool needs_out) {
  cmd->add_option("--scenario", opt.scenario_path, "scenario or sweep file (JSON)")
      ->required();
  if (needs_out)
    cmd->add_option("--out", opt.out_dir, "output directory")->required();
  cmd->add_option("--seed", opt.seed, "override the loss-model seed / sweep seed base");
  cmd->add_option("--runs", opt.runs, "ensemble size (seeds seed, seed+1, ...)");
  cmd->add_flag("--strict", opt.strict, "strict parameter validation");
  cmd->add_option("--quantize", opt.quantize, "over-the-air quantization step size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic median consensus simulator"};
  app.set_version_flag("--version", std::string("medcon ") + medcon::version_string);
  app.require_subcommand(1);

  medcon::CliOptions run_opt, sweep_opt, validate_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario (or an ensemble)");
  add_common_flags(run_cmd, run_opt, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate a parameter sweep");
  add_common_flags(sweep_cmd, sweep_opt, true);
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check scenario parameters against the gain conditions");
  add_common_flags(validate_cmd, validate_opt, false);

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return medcon::cmd_run(run_opt);
  if (sweep_cmd->parsed()) return medcon::cmd_sweep(sweep_opt);
  return medcon::cmd_validate(validate_opt);
}
