#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pdf_object.hpp"

namespace surveykg::pdf {

struct DecodedGlyph {
  std::string text;     // UTF-8; U+FFFD when the code has no Unicode mapping
  double width = 0;     // advance in text space per unit font size
  bool word_space = false;  // single-byte code 32, subject to Tw
};

/// Character-code decoding and metrics for the font kinds that carry text:
/// simple fonts (Type1, TrueType, Type3) and Type0 composites with 2-byte
/// CIDs. Glyph programs are never interpreted.
class Font {
 public:
  Font();
  static Font load(const File& file, const Object& font_obj);

  std::vector<DecodedGlyph> decode(std::string_view bytes) const;

  double ascent() const { return ascent_; }
  double descent() const { return descent_; }

 private:
  struct CodeMapping {
    int bytes = 1;
    std::map<std::uint32_t, std::string> to_unicode;
  };

  void load_simple(const File& file, const Dict& d);
  void load_composite(const File& file, const Dict& d);
  void load_to_unicode(const File& file, const Dict& d);
  void load_descriptor(const File& file, const Dict& d);
  double simple_width(std::uint32_t code) const;

  bool composite_ = false;
  double scale_ = 0.001;
  std::array<std::string, 256> encoding_{};
  std::array<double, 256> widths_{};
  std::array<bool, 256> has_width_{};
  std::map<std::uint32_t, double> cid_widths_;
  double default_width_ = 0.5;
  bool monospace_ = false;
  CodeMapping cmap_;
  bool has_to_unicode_ = false;
  double ascent_ = 0.718;
  double descent_ = -0.207;
};

/// Unicode text for an Adobe glyph name, or empty when unknown.
std::string glyph_name_to_unicode(std::string_view name);

}  // namespace surveykg::pdf
