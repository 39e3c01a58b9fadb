#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace surveykg {

/// Runs the command-line interface on `args` (without the program name).
/// `interactive` enables citation prompts on `in` for the refs stage.
/// Returns 0 when clean, 1 on item failures, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            bool interactive = false);

}  // namespace surveykg
