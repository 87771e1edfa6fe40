#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace schemelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric, infeasibility, failed verification
inline constexpr int kExitUsage = 2;

// Runs one command. `args` excludes the program name. Results go to `out`
// (or to --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count: hardware concurrency capped by SCHEME_LAB_THREADS.
unsigned worker_threads();

}  // namespace schemelab::cli
