#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "surveykg/format/table.hpp"

namespace surveykg::format {

// Edit scripts are line-oriented lists of transforms, one per line. Tokens are
// separated by whitespace; double quotes group a token and accept \" and \\.
// '#' starts a comment. A column argument is a 0-based index or a label.
//
//   transpose
//   merge_rows <row_a> <row_b> [joiner]
//   split_column <col> <delimiter>
//   merge_columns <new_label> <joiner> <col> <col>...
//   drop_column <col>
//   drop_row <row>
//   add_column <label> [literal|resource] [position]
//   rename_column <col> <label>
//   set_kind <col> literal|resource
//   set_reference_column <col>
//   set_cell <row> <col> <value>
//   legend <abbreviation> <expansion>
//   expand_legend

struct EditCommand {
  int line = 0;
  std::vector<std::string> tokens;
};

/// Throws Error{EditScriptError} on unbalanced quotes or unknown commands.
std::vector<EditCommand> parse_edit_script(std::string_view script);

/// Applies commands in order. Transform errors keep their code and gain the
/// script line number in the message.
SurveyTable apply_edits(const SurveyTable& table, const std::vector<EditCommand>& commands);
SurveyTable apply_edit_script(const SurveyTable& table, std::string_view script);

/// Quotes a token when needed so parse_edit_script reads it back verbatim.
std::string quote_token(std::string_view token);

}  // namespace surveykg::format
