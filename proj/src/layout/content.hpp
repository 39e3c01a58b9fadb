#pragma once

#include <string>
#include <vector>

#include "pdf_object.hpp"
#include "surveykg/layout/types.hpp"

namespace surveykg::pdf {

struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  /// this applied first, then `o`.
  Matrix operator*(const Matrix& o) const {
    return {a * o.a + b * o.c,       a * o.b + b * o.d,       c * o.a + d * o.c,
            c * o.b + d * o.d,       e * o.a + f * o.c + o.e, e * o.b + f * o.d + o.f};
  }
  void apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + c * y + e;
    oy = b * x + d * y + f;
  }
  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
};

struct RawGlyph {
  std::string text;
  layout::Rect box;
  double baseline = 0;
  double font_size = 0;
  bool upright = true;
};

struct Segment {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double width = 0;
};

struct PageContent {
  std::vector<RawGlyph> glyphs;
  std::vector<Segment> segments;  // stroked segments plus thin filled bars
  std::vector<layout::Rect> images;
};

/// Runs a page content stream (a stream or an array of streams) and collects
/// positioned text, line art and image placements in the space given by
/// `base`.
PageContent interpret_page(const File& file, const Object& contents, const Object& resources,
                           const Matrix& base);

}  // namespace surveykg::pdf
