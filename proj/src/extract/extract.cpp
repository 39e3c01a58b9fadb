#include "surveykg/extract/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "surveykg/csv.hpp"
#include "surveykg/error.hpp"
#include "surveykg/layout/layout.hpp"
#include "surveykg/text.hpp"

namespace surveykg::extract {

using layout::PositionedGlyph;
using layout::Rect;
using layout::Ruling;

namespace {

constexpr double kSpanTolerance = 1.0;

void check_region(const layout::Region& region) {
  if (!(region.x0 < region.x1) || !(region.y0 < region.y1)) {
    throw Error(Errc::InvalidRegion, "empty region rectangle " + layout::format_region(region));
  }
}

/// Fills text and per-line evidence from glyph lines already in reading order.
void fill_cell(Cell& cell, const std::vector<std::vector<PositionedGlyph>>& lines) {
  std::vector<std::string> parts;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    parts.push_back(layout::join_line(line));
    for (std::size_t i = 0; i < line.size(); ++i) {
      ++cell.glyph_count;
      if (!line[i].upright) ++cell.rotated_glyph_count;
      if (i == 0) continue;
      const double size = std::max(line[i].font_size, 1e-6);
      cell.max_gap_em = std::max(cell.max_gap_em, (line[i].x0 - line[i - 1].x1) / size);
    }
  }
  cell.text = text::join(parts, " ");
}

std::size_t interval_index(const std::vector<double>& ascending, double v) {
  // index i with ascending[i] <= v < ascending[i + 1], clamped to the outline
  const std::size_t n = ascending.size() - 1;
  for (std::size_t i = 0; i + 1 < n + 1; ++i) {
    if (v < ascending[i + 1]) return i;
  }
  return n - 1;
}

std::size_t row_index(const std::vector<double>& descending, double v) {
  const std::size_t n = descending.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (v > descending[i + 1]) return i;
  }
  return n - 1;
}

std::vector<double> unique_positions(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double p : v) {
    if (out.empty() || p - out.back() > layout::kRulingMergeDistance) out.push_back(p);
  }
  return out;
}

bool crosses(const Ruling& h, const Ruling& v) {
  return v.position > h.start + kSpanTolerance && v.position < h.end - kSpanTolerance &&
         h.position > v.start + kSpanTolerance && h.position < v.end - kSpanTolerance;
}

/// Partial rulings forming an inner grid: those crossing another partial
/// ruling, plus partial rulings inside the bounding box of such a group.
std::vector<bool> nested_rulings(const std::vector<Ruling>& rulings, const std::vector<bool>& partial) {
  const std::size_t n = rulings.size();
  std::vector<int> component(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!partial[i] || component[i] >= 0) continue;
    bool any = false;
    for (std::size_t j = 0; j < n && !any; ++j) {
      if (!partial[j] || rulings[i].orientation == rulings[j].orientation) continue;
      const Ruling& h = rulings[i].horizontal() ? rulings[i] : rulings[j];
      const Ruling& v = rulings[i].horizontal() ? rulings[j] : rulings[i];
      any = crosses(h, v);
    }
    if (!any) continue;
    std::vector<std::size_t> stack{i};
    component[i] = next;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (!partial[b] || component[b] >= 0 || rulings[a].orientation == rulings[b].orientation) continue;
        const Ruling& h = rulings[a].horizontal() ? rulings[a] : rulings[b];
        const Ruling& v = rulings[a].horizontal() ? rulings[b] : rulings[a];
        if (crosses(h, v)) {
          component[b] = next;
          stack.push_back(b);
        }
      }
    }
    ++next;
  }
  std::vector<Rect> boxes(static_cast<std::size_t>(next), Rect{1e300, 1e300, -1e300, -1e300});
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] < 0) continue;
    Rect& b = boxes[static_cast<std::size_t>(component[i])];
    const Ruling& r = rulings[i];
    const double x0 = r.horizontal() ? r.start : r.position, x1 = r.horizontal() ? r.end : r.position;
    const double y0 = r.horizontal() ? r.position : r.start, y1 = r.horizontal() ? r.position : r.end;
    b = {std::min(b.x0, x0), std::min(b.y0, y0), std::max(b.x1, x1), std::max(b.y1, y1)};
  }
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!partial[i]) continue;
    if (component[i] >= 0) {
      out[i] = true;
      continue;
    }
    const Ruling& r = rulings[i];
    const double x0 = r.horizontal() ? r.start : r.position, x1 = r.horizontal() ? r.end : r.position;
    const double y0 = r.horizontal() ? r.position : r.start, y1 = r.horizontal() ? r.position : r.end;
    for (const auto& b : boxes) {
      if (x0 >= b.x0 - kSpanTolerance && x1 <= b.x1 + kSpanTolerance && y0 >= b.y0 - kSpanTolerance &&
          y1 <= b.y1 + kSpanTolerance) {
        out[i] = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view method_name(Method m) { return m == Method::Lattice ? "lattice" : "stream"; }

Method parse_method(std::string_view name) {
  if (text::iequals(name, "lattice")) return Method::Lattice;
  if (text::iequals(name, "stream")) return Method::Stream;
  throw Error(Errc::UsageError, "unknown extraction method '" + std::string(name) + "' (stream|lattice)");
}

std::vector<std::vector<std::string>> TableGrid::texts() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(cells.size());
  for (const auto& row : cells) {
    std::vector<std::string> r;
    r.reserve(row.size());
    for (const auto& c : row) r.push_back(c.text);
    out.push_back(std::move(r));
  }
  return out;
}

TableGrid grid_from_texts(const std::vector<std::vector<std::string>>& texts, Method method) {
  TableGrid g;
  g.method = method;
  for (const auto& row : texts) g.n_cols = std::max(g.n_cols, static_cast<int>(row.size()));
  for (const auto& row : texts) {
    std::vector<Cell> r(static_cast<std::size_t>(g.n_cols));
    for (std::size_t c = 0; c < row.size(); ++c) {
      r[c].text = row[c];
      r[c].glyph_count = static_cast<int>(text::to_utf32(row[c]).size());
    }
    g.cells.push_back(std::move(r));
  }
  g.n_rows = static_cast<int>(g.cells.size());
  if (g.n_cols == 0) {
    g.cells.clear();
    g.n_rows = 0;
  }
  return g;
}

std::string_view issue_kind_name(IssueKind k) {
  switch (k) {
    case IssueKind::ColumnSplitError: return "ColumnSplitError";
    case IssueKind::RowSplitError: return "RowSplitError";
    case IssueKind::EmptyColumn: return "EmptyColumn";
    case IssueKind::TextCorruption: return "TextCorruption";
    case IssueKind::HeaderIssue: return "HeaderIssue";
    case IssueKind::VerticalText: return "VerticalText";
    case IssueKind::UnsupportedCellValue: return "UnsupportedCellValue";
    case IssueKind::NestedTable: return "NestedTable";
  }
  return "";
}

std::optional<IssueKind> parse_issue_kind(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(IssueKind::NestedTable); ++i) {
    const auto k = static_cast<IssueKind>(i);
    if (issue_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

TableGrid extract_lattice(const layout::Page& page, const layout::Region& region) {
  check_region(region);
  const Rect rect = region.rect();
  const std::vector<Ruling> rulings = layout::rulings_in_rect(page, rect);

  std::vector<double> hs, vs;
  for (const auto& r : rulings) (r.horizontal() ? hs : vs).push_back(r.position);
  if (unique_positions(hs).size() < 2 || unique_positions(vs).size() < 2) {
    throw Error(Errc::InsufficientRulings, "region " + layout::format_region(region) +
                                               " has fewer than two horizontal and two vertical rulings");
  }
  const double xmin = *std::min_element(vs.begin(), vs.end()), xmax = *std::max_element(vs.begin(), vs.end());
  const double ymin = *std::min_element(hs.begin(), hs.end()), ymax = *std::max_element(hs.begin(), hs.end());
  std::vector<bool> partial(rulings.size());
  for (std::size_t i = 0; i < rulings.size(); ++i) {
    const Ruling& r = rulings[i];
    const double lo = r.horizontal() ? xmin : ymin, hi = r.horizontal() ? xmax : ymax;
    partial[i] = r.start > lo + kSpanTolerance || r.end < hi - kSpanTolerance;
  }
  const std::vector<bool> nested = nested_rulings(rulings, partial);

  hs.clear();
  vs.clear();
  for (std::size_t i = 0; i < rulings.size(); ++i) {
    if (!nested[i]) (rulings[i].horizontal() ? hs : vs).push_back(rulings[i].position);
  }
  std::vector<double> cols = unique_positions(vs);
  std::vector<double> rows = unique_positions(hs);
  std::reverse(rows.begin(), rows.end());
  if (rows.size() < 2 || cols.size() < 2) {
    throw Error(Errc::InsufficientRulings, "region " + layout::format_region(region) +
                                               " has no outer grid once inner-table rulings are set aside");
  }

  TableGrid grid;
  grid.method = Method::Lattice;
  grid.source_region = region;
  grid.n_rows = static_cast<int>(rows.size() - 1);
  grid.n_cols = static_cast<int>(cols.size() - 1);
  grid.cells.assign(rows.size() - 1, std::vector<Cell>(cols.size() - 1));
  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < cols.size(); ++c) grid.cells[r][c].bbox = {cols[c], rows[r + 1], cols[c + 1], rows[r]};
  }

  std::vector<std::vector<std::vector<PositionedGlyph>>> assigned(
      rows.size() - 1, std::vector<std::vector<PositionedGlyph>>(cols.size() - 1));
  for (const auto& g : layout::glyphs_in_rect(page, rect)) {
    assigned[row_index(rows, g.center_y())][interval_index(cols, g.center_x())].push_back(g);
  }
  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
      std::vector<std::vector<PositionedGlyph>> lines;
      for (auto& line : layout::group_lines(assigned[r][c], layout::kReadingOrderTolerance)) {
        lines.push_back(std::move(line.glyphs));
      }
      fill_cell(grid.cells[r][c], lines);
    }
  }
  for (const auto& img : layout::images_in_rect(page, rect)) {
    ++grid.cells[row_index(rows, img.center_y())][interval_index(cols, img.center_x())].image_count;
  }
  for (std::size_t i = 0; i < rulings.size(); ++i) {
    if (!nested[i]) continue;
    const Ruling& r = rulings[i];
    const double mid = (r.start + r.end) / 2;
    const double x = r.horizontal() ? mid : r.position, y = r.horizontal() ? r.position : mid;
    ++grid.cells[row_index(rows, y)][interval_index(cols, x)].nested_ruling_count;
    ++grid.nested_ruling_count;
  }
  return grid;
}

TableGrid extract_stream(const layout::Page& page, const layout::Region& region) {
  check_region(region);
  const Rect rect = region.rect();
  const std::vector<PositionedGlyph> glyphs = layout::glyphs_in_rect(page, rect);
  if (glyphs.empty()) {
    throw Error(Errc::EmptyRegion, "no glyphs inside region " + layout::format_region(region));
  }
  const std::vector<layout::TextLine> lines = layout::group_lines(glyphs, kStreamRowTolerance);

  std::vector<double> widths;
  double minx = glyphs.front().x0, maxx = glyphs.front().x1;
  for (const auto& g : glyphs) {
    widths.push_back(g.width());
    minx = std::min(minx, g.x0);
    maxx = std::max(maxx, g.x1);
  }
  std::sort(widths.begin(), widths.end());
  const std::size_t n = widths.size();
  const double median = n % 2 ? widths[n / 2] : (widths[n / 2 - 1] + widths[n / 2]) / 2;
  const double threshold = kColumnGapFactor * median;

  // Per-row occupancy intervals, then a coverage sweep over all rows.
  std::vector<std::pair<double, double>> intervals;
  for (const auto& line : lines) {
    std::vector<std::pair<double, double>> spans;
    for (const auto& g : line.glyphs) spans.emplace_back(g.x0, g.x1);
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && s.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, s.second);
      } else {
        merged.push_back(s);
      }
    }
    intervals.insert(intervals.end(), merged.begin(), merged.end());
  }
  std::vector<double> coords{minx, maxx};
  for (const auto& [a, b] : intervals) {
    coords.push_back(a);
    coords.push_back(b);
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  std::vector<int> delta(coords.size() + 1, 0);
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), v) - coords.begin());
  };
  for (const auto& [a, b] : intervals) {
    ++delta[index_of(a)];
    --delta[index_of(b)];
  }
  const int allowed = static_cast<int>(std::floor((1.0 - kChannelEmptyFraction) * static_cast<double>(lines.size()) + 1e-9));
  std::vector<double> bounds{region.x0};
  int coverage = 0;
  double run_start = -1;
  for (std::size_t k = 0; k + 1 < coords.size(); ++k) {
    coverage += delta[k];
    const bool free = coverage <= allowed;
    if (free && run_start < 0) run_start = coords[k];
    if ((!free || k + 2 == coords.size()) && run_start >= 0) {
      const double run_end = free ? coords[k + 1] : coords[k];
      if (run_start > minx && run_end < maxx && run_end - run_start > threshold) {
        bounds.push_back((run_start + run_end) / 2);
      }
      run_start = -1;
    }
  }
  bounds.push_back(region.x1);

  TableGrid grid;
  grid.method = Method::Stream;
  grid.source_region = region;
  grid.n_rows = static_cast<int>(lines.size());
  grid.n_cols = static_cast<int>(bounds.size() - 1);
  grid.cells.assign(lines.size(), std::vector<Cell>(bounds.size() - 1));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::vector<std::vector<PositionedGlyph>> by_col(bounds.size() - 1);
    for (const auto& g : lines[r].glyphs) by_col[interval_index(bounds, g.center_x())].push_back(g);
    for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
      Cell& cell = grid.cells[r][c];
      cell.bbox = {bounds[c], lines[r].box.y0, bounds[c + 1], lines[r].box.y1};
      fill_cell(cell, {by_col[c]});
    }
  }
  for (const auto& img : layout::images_in_rect(page, rect)) {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t r = 0; r < lines.size(); ++r) {
      const double d = std::abs(lines[r].box.center_y() - img.center_y());
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    ++grid.cells[best][interval_index(bounds, img.center_x())].image_count;
  }
  return grid;
}

TableGrid extract_table(const layout::Page& page, const layout::Region& region, Method method) {
  return method == Method::Lattice ? extract_lattice(page, region) : extract_stream(page, region);
}

TableGrid merge_multipage(const std::vector<TableGrid>& parts) {
  if (parts.empty()) return TableGrid{};
  TableGrid out = parts.front();
  const auto header = out.n_rows > 0 ? out.texts().front() : std::vector<std::string>{};
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const TableGrid& part = parts[p];
    if (part.n_rows == 0) continue;
    if (out.n_rows == 0) {
      out = part;
      continue;
    }
    if (part.n_cols != out.n_cols) {
      throw Error(Errc::ColumnCountMismatch, "part " + std::to_string(p + 1) + " has " + std::to_string(part.n_cols) +
                                                 " columns, expected " + std::to_string(out.n_cols));
    }
    std::size_t first = 0;
    if (part.texts().front() == header) first = 1;
    for (std::size_t r = first; r < part.cells.size(); ++r) out.cells.push_back(part.cells[r]);
    out.nested_ruling_count += part.nested_ruling_count;
  }
  out.n_rows = static_cast<int>(out.cells.size());
  return out;
}

std::vector<ExtractionIssue> diagnose(const TableGrid& grid) {
  std::vector<ExtractionIssue> out;
  auto add = [&](IssueKind k, int r, int c, std::string note) { out.push_back({k, r, c, std::move(note)}); };
  auto empty = [](const Cell& c) { return text::trim(c.text).empty(); };

  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const Cell& cell = grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell.max_gap_em >= kColumnSplitGapEm && cell.nested_ruling_count == 0) {
        add(IssueKind::ColumnSplitError, r, c, "wide gap inside cell text; columns may be merged");
      }
    }
  }
  if (grid.n_rows > 1) {
    std::vector<int> split_rows;
    for (int r = 1; r < grid.n_rows; ++r) {
      if (empty(grid.cells[static_cast<std::size_t>(r)][0])) split_rows.push_back(r);
    }
    if (static_cast<double>(split_rows.size()) > kRowSplitFraction * (grid.n_rows - 1)) {
      for (int r : split_rows) add(IssueKind::RowSplitError, r, 0, "empty first cell; likely a wrapped row");
    }
    for (int c = 0; c < grid.n_cols; ++c) {
      bool all_empty = true;
      for (int r = 1; r < grid.n_rows && all_empty; ++r) {
        all_empty = empty(grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
      }
      if (all_empty) add(IssueKind::EmptyColumn, -1, c, "all cells below the header are empty");
    }
  }
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const Cell& cell = grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell.text.find(text::kReplacementChar) != std::string::npos) {
        add(IssueKind::TextCorruption, r, c, "replacement characters in cell text");
      }
    }
  }
  if (grid.n_rows > 0) {
    for (int c = 0; c < grid.n_cols; ++c) {
      if (empty(grid.cells[0][static_cast<std::size_t>(c)])) add(IssueKind::HeaderIssue, 0, c, "empty header cell");
    }
  }
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const Cell& cell = grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell.rotated_glyph_count > 0) add(IssueKind::VerticalText, r, c, "rotated glyphs in cell");
    }
  }
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const Cell& cell = grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell.image_count > 0) add(IssueKind::UnsupportedCellValue, r, c, "cell value is an image");
    }
  }
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const Cell& cell = grid.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell.nested_ruling_count > 0) add(IssueKind::NestedTable, r, c, "inner table inside cell");
    }
  }
  return out;
}

std::string grid_to_csv(const TableGrid& grid) { return csv::write(grid.texts()); }

}  // namespace surveykg::extract
