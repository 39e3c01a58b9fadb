#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surveykg/layout/types.hpp"

namespace surveykg::extract {

enum class Method { Stream, Lattice };

std::string_view method_name(Method m);
/// Accepts "stream" or "lattice" in any case. Throws Error{UsageError}.
Method parse_method(std::string_view name);

struct Cell {
  std::string text;
  layout::Rect bbox;
  int glyph_count = 0;

  // Evidence used by diagnose(); not part of the serialized grid.
  int rotated_glyph_count = 0;
  int image_count = 0;
  int nested_ruling_count = 0;
  /// Widest horizontal gap between neighbouring glyphs on one line, in ems.
  double max_gap_em = 0;

  bool operator==(const Cell&) const = default;
};

struct TableGrid {
  std::vector<std::vector<Cell>> cells;  // row-major, rectangular
  int n_rows = 0;
  int n_cols = 0;
  layout::Region source_region;
  Method method = Method::Stream;
  /// Number of ruling segments excluded from the lattice as an inner table.
  int nested_ruling_count = 0;

  std::vector<std::vector<std::string>> texts() const;

  bool operator==(const TableGrid&) const = default;
};

/// Builds a grid from plain texts; geometry fields stay zero.
TableGrid grid_from_texts(const std::vector<std::vector<std::string>>& texts, Method method = Method::Stream);

enum class IssueKind {
  ColumnSplitError,
  RowSplitError,
  EmptyColumn,
  TextCorruption,
  HeaderIssue,
  VerticalText,
  UnsupportedCellValue,
  NestedTable,
};

std::string_view issue_kind_name(IssueKind k);
std::optional<IssueKind> parse_issue_kind(std::string_view name);

struct ExtractionIssue {
  IssueKind kind = IssueKind::EmptyColumn;
  int row = -1;     // -1 when the issue concerns a whole column
  int column = -1;  // -1 when the issue concerns a whole row
  std::string note;

  bool operator==(const ExtractionIssue&) const = default;
};

// Stream heuristics.
inline constexpr double kStreamRowTolerance = 2.0;     // baseline clustering, points
inline constexpr double kColumnGapFactor = 1.0;        // x median glyph width
inline constexpr double kChannelEmptyFraction = 0.9;   // rows that must leave a channel empty
// Diagnose heuristics.
inline constexpr double kRowSplitFraction = 0.2;       // data rows with an empty first cell
inline constexpr double kColumnSplitGapEm = 2.0;       // same-line gap inside one cell

/// Ruling-based segmentation. Throws Error{InvalidRegion} or
/// Error{InsufficientRulings} when fewer than two horizontal or two vertical
/// rulings bound the region.
TableGrid extract_lattice(const layout::Page& page, const layout::Region& region);

/// Whitespace-based segmentation. Throws Error{InvalidRegion} or
/// Error{EmptyRegion}.
TableGrid extract_stream(const layout::Page& page, const layout::Region& region);

TableGrid extract_table(const layout::Page& page, const layout::Region& region, Method method);

/// Concatenates parts, dropping a later part's first row when it repeats the
/// first part's header. Throws Error{ColumnCountMismatch}.
TableGrid merge_multipage(const std::vector<TableGrid>& parts);

std::vector<ExtractionIssue> diagnose(const TableGrid& grid);

/// RFC 4180 serialization of the cell texts.
std::string grid_to_csv(const TableGrid& grid);

}  // namespace surveykg::extract
