#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace surveykg::layout {

// All geometry is in PDF user-space points relative to the lower-left corner
// of the page box, y increasing upward.

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double center_x() const { return (x0 + x1) / 2; }
  double center_y() const { return (y0 + y1) / 2; }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }

  bool operator==(const Rect&) const = default;
};

struct PositionedGlyph {
  std::string text;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double font_size = 0;
  /// y of the glyph origin; rows are clustered on this value.
  double baseline = 0;
  /// false when the text matrix rotates or mirrors the glyph.
  bool upright = true;

  double center_x() const { return (x0 + x1) / 2; }
  double center_y() const { return (y0 + y1) / 2; }
  double width() const { return x1 - x0; }

  bool operator==(const PositionedGlyph&) const = default;
};

enum class Orientation { Horizontal, Vertical };

struct Ruling {
  Orientation orientation = Orientation::Horizontal;
  /// y for horizontal rulings, x for vertical ones.
  double position = 0;
  double start = 0;
  double end = 0;
  double thickness = 0;

  double length() const { return end - start; }
  bool horizontal() const { return orientation == Orientation::Horizontal; }

  bool operator==(const Ruling&) const = default;
};

struct Page {
  std::size_t index = 0;
  double width = 0;
  double height = 0;
  /// Reading order: top-to-bottom by baseline, ties within 1pt by ascending x.
  std::vector<PositionedGlyph> glyphs;
  std::vector<Ruling> rulings;
  /// Placement boxes of raster images drawn on the page.
  std::vector<Rect> images;

  Rect box() const { return {0, 0, width, height}; }

  bool operator==(const Page&) const = default;
};

struct Document {
  std::string source_path;
  std::vector<Page> pages;

  std::size_t page_count() const { return pages.size(); }

  bool operator==(const Document&) const = default;
};

struct Region {
  std::size_t page_index = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  Rect rect() const { return {x0, y0, x1, y1}; }

  bool operator==(const Region&) const = default;
};

/// Parses the CLI region syntax `page:x0,y0,x1,y1`. Throws
/// Error{InvalidRegion} on malformed input or an empty rectangle.
Region parse_region(const std::string& spec);
std::string format_region(const Region& region);

}  // namespace surveykg::layout
