#include "sppa/sppa_c.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

int execute(const std::string& command, const std::string& config, const std::string& out, bool strict) {
  sppa_experiment* exp = nullptr;
  const sppa_status st =
      sppa_experiment_execute(command.c_str(), config.c_str(), out.empty() ? nullptr : out.c_str(), &exp);
  if (st != SPPA_OK) {
    std::fprintf(stderr, "sppa %s: %s\n", command.c_str(), sppa_last_error());
    return 1;
  }
  std::fputs(sppa_experiment_report(exp), stdout);
  std::printf("output: %s\n", sppa_experiment_output_dir(exp));
  const bool passed = sppa_experiment_passed(exp) != 0;
  sppa_experiment_free(exp);
  if (!passed) {
    std::fprintf(stderr, "sppa %s: certificate FAIL%s\n", command.c_str(), strict ? "" : " (not strict)");
    return strict ? 2 : 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal point experiments: PPA, A-PPA, SPPA, SALM and the ODE lab"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  bool strict = true;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (default: config output_dir, $SPPA_OUT_DIR, ./out)");
    sub->add_option("--strict-certificates", strict, "exit with status 2 when a certificate fails")
        ->default_val(true);
  };
  auto* run = app.add_subcommand("run", "run one experiment");
  auto* certify = app.add_subcommand("certify", "check a schedule against the rate theorems");
  auto* compare = app.add_subcommand("compare", "run several algorithms on one problem");
  for (auto* sub : {run, certify, compare}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = run->parsed() ? "run" : certify->parsed() ? "certify" : "compare";
  return execute(command, config, out, strict);
}
