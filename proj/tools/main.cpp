#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"


int main(int argc, char** argv) {
  CLI::App app{"Qutrit quantum-memory tomography toolkit"};
  app.require_subcommand(1);

  qmem::cli::CommandOptions opts;
  std::string mode;
  std::uint64_t seed = 0;

  auto* simulate = app.add_subcommand("simulate", "simulate coincidence counts from a config");
  simulate->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
  simulate->add_option("--out", opts.out_path, "counts file (overrides output.counts)");
  auto* sim_seed = simulate->add_option("--seed", seed, "source seed");
  auto* sim_mode = simulate->add_option("--mode", mode,
                                        "abstract, optical-ideal or optical-phase-only");

  auto* qpt = app.add_subcommand("reconstruct-process", "reconstruct chi from process counts");
  qpt->add_option("--counts", opts.counts_path, "counts file")->required();
  qpt->add_option("--config", opts.config_path, "run configuration (JSON)");
  qpt->add_option("--out", opts.out_path, "report file (overrides output.report)");
  auto* qpt_seed = qpt->add_option("--seed", seed, "bootstrap seed");

  auto* qst = app.add_subcommand("reconstruct-state", "reconstruct rho from state counts");
  qst->add_option("--counts", opts.counts_path, "counts file")->required();
  qst->add_option("--config", opts.config_path, "run configuration (JSON)");
  qst->add_option("--out", opts.out_path, "report file (overrides output.report)");
  auto* qst_seed = qst->add_option("--seed", seed, "bootstrap seed");

  auto* modes = app.add_subcommand("modes", "export mask, Fourier and image planes of a state");
  modes->add_option("--state", opts.state, "state name or JSON amplitude array");
  modes->add_option("--config", opts.config_path, "run configuration (JSON)");
  modes->add_option("--out", opts.out_path, "output directory (overrides output.modes)");
  auto* modes_mode = modes->add_option("--mode", mode,
                                       "abstract, optical-ideal or optical-phase-only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qmem::cli::kExitInvalidParameter;
  }

  for (auto* opt : {sim_seed, qpt_seed, qst_seed}) {
    if (opt->count() > 0) opts.seed = seed;
  }
  for (auto* opt : {sim_mode, modes_mode}) {
    if (opt->count() > 0) opts.mode = mode;
  }

  if (simulate->parsed()) return qmem::cli::run_simulate(opts, std::cout, std::cerr);
  if (qpt->parsed()) return qmem::cli::run_reconstruct_process(opts, std::cout, std::cerr);
  if (qst->parsed()) return qmem::cli::run_reconstruct_state(opts, std::cout, std::cerr);
  return qmem::cli::run_modes(opts, std::cout, std::cerr);
}
