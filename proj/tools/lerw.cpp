// Command-line front end: one subcommand per pipeline, flat key=value config
// files merged with --key value flags (flags win). Exit codes: 0 success,
// 2 config error, 3 infeasible schedule, 1 other failure.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "lerw/experiment.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: lerw <subcommand> [--config FILE] [--key value]...\n"
      "\n"
      "subcommands:\n"
      "  lerw-run       loop-erased walk lengths, rescaled (graph, case, times, seed,\n"
      "                 replicates, a+b or alpha+gamma, [horizon])\n"
      "  rayleigh-run   Rayleigh process paths (horizon, seed, [mode=event|field, y0,\n"
      "                 replicates])\n"
      "  surrogate-run  complete-graph surrogate chain (m, steps, seed, [replicates])\n"
      "  constants      gamma/alpha/a/b/d/m estimation (graph, case, seed, replicates,\n"
      "                 [tau, eta, delta, tmax])\n"
      "  mixing         uniform mixing time tau_n (graph, [tmax])\n"
      "  fdd            per-time KS, walk vs Rayleigh (graph, case, times, seed,\n"
      "                 replicates, a+b or alpha+gamma, [rayleigh_replicates])\n"
      "  couple-verify  single-success vs Bernoulli coupling check (j, p, q, seed,\n"
      "                 [replicates])\n"
      "  modulus        Skorohod modulus of a breakpoint CSV (in, theta, horizon,\n"
      "                 [slope, y0])\n"
      "\n"
      "common keys: seed, out (output prefix), workers. Outputs <out>.csv and\n"
      "<out>.json. Runs are reproducible: replicate r uses the stream\n"
      "mix64(seed + (r+1)*0x9e3779b97f4a7c15).\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage();
    return args.empty() ? 2 : 0;
  }
  try {
    const lerw::ExperimentConfig config = lerw::parse_config(args);
    const lerw::RunResult result = lerw::run_experiment(config);
    std::cout << result.summary["estimates"].dump(2) << '\n';
    std::cerr << "wrote " << result.csv_path << " and " << result.json_path << '\n';
    return 0;
  } catch (const lerw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lerw::ScheduleInfeasible& e) {
    std::cerr << "infeasible schedule: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
