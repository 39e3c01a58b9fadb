#pragma once

// Programmatically generated fixture PDFs. Each fixture carries a manifest of
// what was drawn: the regions to extract, the expected cell texts and the
// extraction issues a clean or defective table should produce.

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdf_writer.hpp"
#include "surveykg/layout/types.hpp"

namespace surveykg::testing {

using TextMatrix = std::vector<std::vector<std::string>>;

enum class Borders { None, Grid, PerCell, Booktabs };

struct TableDraw {
  int page = 0;
  double x0 = 72;
  double top = 700;
  std::vector<double> widths;
  double size = 10;
  double pad = 4;
  double leading = 12;
  Borders borders = Borders::Grid;
  FixtureFont font = FixtureFont::Helvetica;
  bool kerned = false;
  bool allow_overflow = false;
  std::function<FixtureFont(int, int)> font_for;     // per-cell override
  std::set<std::pair<int, int>> rotated;              // text drawn bottom-to-top
  std::set<std::pair<int, int>> images;               // small image instead of text
  std::set<std::pair<int, int>> nested;               // "a|b\nc|d" drawn as a ruled 2x2 grid
};

struct DrawnTable {
  layout::Region region;       // table outline grown by 2pt
  std::vector<double> h;       // horizontal ruling positions, descending
  std::vector<double> v;       // vertical ruling positions, ascending
};

/// Draws cell texts; a '\n' inside a cell starts a new line.
DrawnTable draw_table(PdfWriter& pdf, const TableDraw& draw, const TextMatrix& cells);

/// Cell texts as an extractor should report them: lines joined by a space.
TextMatrix flatten_lines(const TextMatrix& cells);

struct TableFixture {
  std::string name;
  std::string pdf;
  std::string mode;                      // "lattice" or "stream"
  std::vector<layout::Region> regions;   // one per part, in order
  TextMatrix expected;                   // merged grid; empty when not a golden
  std::vector<std::string> issues;       // expected diagnose kinds, sorted
  bool golden = false;
  bool dual_cue = false;
  std::vector<double> h_rulings;         // first part, descending
  std::vector<double> v_rulings;         // first part, ascending
};

const std::vector<TableFixture>& table_fixtures();
const TableFixture& table_fixture(std::string_view name);

}  // namespace surveykg::testing
