#pragma once

// Batch command-line front end: one command per run, optional parameter sweeps,
// deterministic CSV/JSON output.

#include <iosfwd>
#include <string>
#include <vector>

namespace speclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNonConvergence = 3;

/// args excludes the program name. Results go to `out` (or --output), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.15g, the format every number is printed with.
std::string format_number(double x);

}  // namespace speclab::cli
