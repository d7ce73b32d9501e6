#ifndef SHIFTLAB_RUN_HPP
#define SHIFTLAB_RUN_HPP

#include <string>

namespace shiftlab {

struct RunResult {
  int exit_code = 0;     // 0 ok, 1 check failure, 2 input/parse error
  std::string json;      // full report (also written to --out if given)
  std::string error;     // human-readable message for nonzero exits
};

/// Executes one CLI invocation: subcommands weights, series, op, growth,
/// subspace, factorize, dynkin, verify. Deterministic output for a fixed
/// argument list and seed; SHIFTLAB_THREADS caps verify parallelism.
RunResult run_cli(int argc, const char* const* argv);

}  // namespace shiftlab

#endif
