#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surveykg/extract/extract.hpp"

namespace surveykg::format {

enum class Kind { Literal, Resource };
enum class Role { Reference, Data, Metadata };

std::string_view kind_name(Kind k);
std::string_view role_name(Role r);

struct ColumnSpec {
  std::string label;
  Kind kind = Kind::Literal;
  Role role = Role::Data;
  /// Header text this column was read from, if any. Reused when writing so a
  /// hand-written header such as "[R]Method" survives unchanged; ignored by
  /// equality.
  std::string source;

  bool operator==(const ColumnSpec& o) const { return label == o.label && kind == o.kind && role == o.role; }
};

using Row = std::vector<std::string>;
using Legend = std::map<std::string, std::string>;

struct SurveyTable {
  std::vector<ColumnSpec> columns;
  std::vector<Row> rows;
  std::optional<Legend> legend;

  std::size_t n_cols() const { return columns.size(); }
  std::size_t n_rows() const { return rows.size(); }
  /// First column with role Reference.
  std::optional<std::size_t> reference_column() const;

  bool operator==(const SurveyTable&) const = default;
};

struct Violation {
  int rule = 0;                 // 1..6
  std::optional<int> row;       // 0-based data row
  std::optional<int> column;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// True when a label names the citation-key column ("Reference", any case).
bool is_reference_label(std::string_view label);

// Header grammar. A header cell is an optional role tag ("[M]" metadata,
// "[REF]" reference under another label, "[D]" data column labelled
// "Reference"), an optional "[R]" resource marker, then the label. Each tag
// may be followed by one space. A label starting with '[', '\' or a space is
// written with a leading '\' so rendering and parsing are exact inverses.
std::vector<std::string> render_headers(const std::vector<ColumnSpec>& columns);
std::vector<ColumnSpec> parse_headers(const std::vector<std::string>& headers);

/// Builds a table from a header row and data rows. Cells are NFC-normalized;
/// short rows are padded with empty cells.
SurveyTable table_from_rows(const std::vector<std::string>& header, const std::vector<Row>& rows);

/// Row 0 becomes the header. Throws Error{EmptyGrid}.
SurveyTable from_grid(const extract::TableGrid& grid);

std::vector<Violation> validate(const SurveyTable& table);

// Transforms return new tables. Row and column indices are 0-based; row
// indices count data rows only. Out-of-range indices throw
// Error{IndexOutOfRange}.
SurveyTable transpose(const SurveyTable& t);
/// Appends row b's non-empty cells to row a's with the joiner and removes b.
/// Throws Error{MergeShapeMismatch} when a == b.
SurveyTable merge_rows(const SurveyTable& t, std::size_t row_a, std::size_t row_b, std::string_view joiner);
/// Splits every cell at each delimiter occurrence (pieces trimmed) into as
/// many columns as the widest cell needs.
SurveyTable split_column(const SurveyTable& t, std::size_t col, std::string_view delimiter);
/// Replaces the given columns (at least two, distinct) by one column at the
/// position of the leftmost; throws Error{MergeShapeMismatch} otherwise.
SurveyTable merge_columns(const SurveyTable& t, const std::vector<std::size_t>& cols, std::string_view joiner,
                          std::string_view new_label);
SurveyTable drop_column(const SurveyTable& t, std::size_t col);
SurveyTable drop_row(const SurveyTable& t, std::size_t row);
SurveyTable set_reference_column(const SurveyTable& t, std::size_t col);
/// Replaces whole-cell legend keys in Data columns. Throws Error{NoLegend}.
SurveyTable expand_legend(const SurveyTable& t);
SurveyTable add_column(const SurveyTable& t, std::string_view label, Kind kind, std::optional<std::size_t> position);
SurveyTable rename_column(const SurveyTable& t, std::size_t col, std::string_view label);
SurveyTable set_kind(const SurveyTable& t, std::size_t col, Kind kind);
SurveyTable set_cell(const SurveyTable& t, std::size_t row, std::size_t col, std::string_view value);
SurveyTable set_legend_entry(const SurveyTable& t, std::string_view key, std::string_view expansion);

// CSV files. A legend travels in a sidecar "<stem>.legend.csv" next to the
// table file (header row "abbreviation,expansion").
std::string to_csv(const SurveyTable& t);
SurveyTable from_csv(std::string_view data);
std::filesystem::path legend_path(const std::filesystem::path& table_path);
void write_csv(const SurveyTable& t, const std::filesystem::path& path);
SurveyTable read_csv(const std::filesystem::path& path);

}  // namespace surveykg::format
