#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace surveykg::refs::detail {

/// Uppercase initials such as "J.", "JR" or "J.-P.".
bool is_initials_token(std::string_view token);

/// Whitespace tokens of a name with trailing "et al." removed.
std::vector<std::string> name_tokens(std::string_view name);

/// Family tokens (last name with particles) and the remaining given tokens.
std::pair<std::vector<std::string>, std::vector<std::string>> split_family(const std::vector<std::string>& tokens);

}  // namespace surveykg::refs::detail
