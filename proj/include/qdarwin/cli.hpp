#pragma once

// Command-line front end. Subcommands:
//   pip         partial-information curve I(f) over a fragment-fraction grid
//   redundancy  f_delta, R_delta, asymptotic R and plateau flag over a time grid
//   decohere    tau_D, Gamma(t) and branch entropy for a physical scenario
//   scenario    full report for one scenario file at one elapsed time
//   validate    dual-route self-checks (oracle vs closed forms, thermal constants)
//
// Exit codes: 0 success, 1 validation mismatch, 2 usage or schema error,
// 3 regime error (also crossover warnings under --strict).

#include <iosfwd>

namespace qdarwin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRegime = 3;

// argv[0] is the program name, as in main(). Streams are injectable so tests
// can run the CLI in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdarwin::cli
