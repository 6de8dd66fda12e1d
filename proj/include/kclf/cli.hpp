#ifndef KCLF_CLI_HPP
#define KCLF_CLI_HPP

#include <ostream>

namespace kclf {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int property_failure = 1;  // selftest
inline constexpr int unsolvable = 2;
inline constexpr int scheme_failed = 3;  // also not Hurwitz
inline constexpr int divergent = 4;
inline constexpr int audit_failed = 5;
inline constexpr int usage = 64;
inline constexpr int bad_input = 65;
}  // namespace exit_code

/// Entry point behind the koopman-clf executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Bracket identity, Koopman entry formula, triangularity and lex-order
/// suites at small sizes. inject_entry_sign builds every Koopman matrix
/// with the sign-flip mutation. Returns 0 or exit_code::property_failure.
int run_selftest(bool inject_entry_sign, std::ostream& out);

}  // namespace kclf

#endif  // KCLF_CLI_HPP
