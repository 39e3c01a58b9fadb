#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "surveykg/layout/types.hpp"

namespace surveykg::layout {

// Thresholds shared by the loader and the region queries.
inline constexpr double kRulingAxisTolerance = 0.5;  // |dx| or |dy| below this is axis-aligned
inline constexpr double kMinRulingLength = 4.0;
inline constexpr double kRulingMergeDistance = 1.0;
inline constexpr double kReadingOrderTolerance = 1.0;
inline constexpr double kWordGapFactor = 0.25;  // x font size

/// Loads every page of a PDF file. Throws Error with FileUnreadable, NotAPdf,
/// EncryptedPdf, NoTextLayer or MalformedPdf.
Document load_document(const std::filesystem::path& path);
Document load_document_from_memory(std::string bytes, std::string source_name);

/// Glyphs whose bounding-box center lies inside the region, in the page's
/// reading order. Throws Error{PageOutOfRange} / Error{InvalidRegion}.
std::vector<PositionedGlyph> glyphs_in_region(const Document& doc, const Region& region);

/// Rulings clipped to the region; clipped pieces shorter than
/// kMinRulingLength are dropped.
std::vector<Ruling> rulings_in_region(const Document& doc, const Region& region);

std::vector<PositionedGlyph> glyphs_in_rect(const Page& page, const Rect& rect);
std::vector<Ruling> rulings_in_rect(const Page& page, const Rect& rect);
std::vector<Rect> images_in_rect(const Page& page, const Rect& rect);

const Page& page_for(const Document& doc, const Region& region);

/// Classifies raw segments by orientation, then merges same-orientation
/// rulings within kRulingMergeDistance whose spans overlap or touch.
std::vector<Ruling> merge_rulings(std::vector<Ruling> rulings);

/// Sorts top-to-bottom by baseline; baselines within kReadingOrderTolerance of
/// a line's first glyph count as one line, ordered by ascending x.
void sort_reading_order(std::vector<PositionedGlyph>& glyphs);

struct TextLine {
  std::vector<PositionedGlyph> glyphs;  // ascending x
  double baseline = 0;
  Rect box;
  std::string text;
};

/// Groups glyphs into lines by baseline (anchor tolerance), top to bottom.
std::vector<TextLine> group_lines(std::vector<PositionedGlyph> glyphs, double tolerance);

/// Concatenates glyphs of one line (ascending x), inserting a space when the
/// horizontal gap exceeds kWordGapFactor x font size.
std::string join_line(const std::vector<PositionedGlyph>& line);

/// Splits one line into words by the same gap rule.
std::vector<std::vector<PositionedGlyph>> split_words(const std::vector<PositionedGlyph>& line);

/// Line-oriented dump: `GLYPH page x0 y0 x1 y1 <text>`, `RULE page H|V pos
/// start end` and `IMAGE page x0 y0 x1 y1`.
std::string dump_layout(const Document& doc);

}  // namespace surveykg::layout
