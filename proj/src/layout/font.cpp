#include "font.hpp"

#include <algorithm>
#include <unordered_map>

#include "surveykg/text.hpp"

namespace surveykg::pdf {

namespace {

// Helvetica advance widths for codes 32..126 (standard font metrics).
constexpr int kHelveticaWidths[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,  // 32-47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,  // 48-63
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // 64-79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,  // 80-95
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,  // 96-111
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584,       // 112-126
};

// WinAnsiEncoding 0x80..0x9F; 0 marks undefined codes.
constexpr char32_t kWinAnsiHigh[32] = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178,
};

std::string cp_to_utf8(char32_t cp) {
  std::string s;
  text::append_utf8(s, cp);
  return s;
}

std::array<std::string, 256> win_ansi() {
  std::array<std::string, 256> enc{};
  for (int c = 32; c < 127; ++c) enc[static_cast<std::size_t>(c)] = std::string(1, static_cast<char>(c));
  for (int c = 0x80; c < 0xA0; ++c) {
    if (kWinAnsiHigh[c - 0x80]) enc[static_cast<std::size_t>(c)] = cp_to_utf8(kWinAnsiHigh[c - 0x80]);
  }
  for (int c = 0xA0; c < 0x100; ++c) enc[static_cast<std::size_t>(c)] = cp_to_utf8(static_cast<char32_t>(c));
  enc[0xA0] = " ";
  enc[0xAD] = "-";
  return enc;
}

std::array<std::string, 256> standard() {
  std::array<std::string, 256> enc{};
  for (int c = 32; c < 127; ++c) enc[static_cast<std::size_t>(c)] = std::string(1, static_cast<char>(c));
  enc[0x27] = cp_to_utf8(0x2019);
  enc[0x60] = cp_to_utf8(0x2018);
  const std::pair<int, char32_t> high[] = {
      {0xA1, 0x00A1}, {0xA2, 0x00A2}, {0xA3, 0x00A3}, {0xA4, 0x2044}, {0xA5, 0x00A5},
      {0xA6, 0x0192}, {0xA7, 0x00A7}, {0xA8, 0x00A4}, {0xA9, 0x0027}, {0xAA, 0x201C},
      {0xAB, 0x00AB}, {0xAC, 0x2039}, {0xAD, 0x203A}, {0xB1, 0x2013}, {0xB2, 0x2020},
      {0xB3, 0x2021}, {0xB4, 0x00B7}, {0xB6, 0x00B6}, {0xB7, 0x2022}, {0xB8, 0x201A},
      {0xB9, 0x201E}, {0xBA, 0x201D}, {0xBB, 0x00BB}, {0xBC, 0x2026}, {0xBD, 0x2030},
      {0xBF, 0x00BF}, {0xC1, 0x0060}, {0xC2, 0x00B4}, {0xC3, 0x02C6}, {0xC4, 0x02DC},
      {0xD0, 0x2014}, {0xE1, 0x00C6}, {0xE8, 0x0141}, {0xE9, 0x00D8}, {0xEA, 0x0152},
      {0xF1, 0x00E6}, {0xF5, 0x0131}, {0xF8, 0x0142}, {0xF9, 0x00F8}, {0xFA, 0x0153},
      {0xFB, 0x00DF},
  };
  for (auto [code, cp] : high) enc[static_cast<std::size_t>(code)] = cp_to_utf8(cp);
  enc[0xAE] = "fi";
  enc[0xAF] = "fl";
  return enc;
}

const std::unordered_map<std::string_view, std::string_view>& glyph_names() {
  static const std::unordered_map<std::string_view, std::string_view> names = {
      {"space", " "}, {"exclam", "!"}, {"quotedbl", "\""}, {"numbersign", "#"},
      {"dollar", "$"}, {"percent", "%"}, {"ampersand", "&"}, {"quotesingle", "'"},
      {"quoteright", "’"}, {"quoteleft", "‘"}, {"parenleft", "("},
      {"parenright", ")"}, {"asterisk", "*"}, {"plus", "+"}, {"comma", ","},
      {"hyphen", "-"}, {"period", "."}, {"slash", "/"}, {"zero", "0"}, {"one", "1"},
      {"two", "2"}, {"three", "3"}, {"four", "4"}, {"five", "5"}, {"six", "6"},
      {"seven", "7"}, {"eight", "8"}, {"nine", "9"}, {"colon", ":"}, {"semicolon", ";"},
      {"less", "<"}, {"equal", "="}, {"greater", ">"}, {"question", "?"}, {"at", "@"},
      {"bracketleft", "["}, {"backslash", "\\"}, {"bracketright", "]"},
      {"asciicircum", "^"}, {"underscore", "_"}, {"grave", "`"}, {"braceleft", "{"},
      {"bar", "|"}, {"braceright", "}"}, {"asciitilde", "~"}, {"endash", "–"},
      {"emdash", "—"}, {"bullet", "•"}, {"quotedblleft", "“"},
      {"quotedblright", "”"}, {"quotesinglbase", "‚"}, {"quotedblbase", "„"},
      {"ellipsis", "…"}, {"fi", "fi"}, {"fl", "fl"}, {"ff", "ff"}, {"ffi", "ffi"},
      {"ffl", "ffl"}, {"dagger", "†"}, {"daggerdbl", "‡"}, {"section", "§"},
      {"paragraph", "¶"}, {"degree", "°"}, {"copyright", "©"},
      {"registered", "®"}, {"trademark", "™"}, {"minus", "−"},
      {"multiply", "×"}, {"divide", "÷"}, {"plusminus", "±"},
      {"check", "✓"}, {"checkmark", "✓"}, {"dotlessi", "ı"},
      {"germandbls", "ß"}, {"AE", "Æ"}, {"ae", "æ"}, {"OE", "Œ"},
      {"oe", "œ"}, {"Oslash", "Ø"}, {"oslash", "ø"}, {"eth", "ð"},
      {"Eth", "Ð"}, {"thorn", "þ"}, {"Thorn", "Þ"}, {"ydieresis", "ÿ"},
      {"Aacute", "Á"}, {"aacute", "á"}, {"Agrave", "À"}, {"agrave", "à"},
      {"Acircumflex", "Â"}, {"acircumflex", "â"}, {"Adieresis", "Ä"},
      {"adieresis", "ä"}, {"Atilde", "Ã"}, {"atilde", "ã"}, {"Aring", "Å"},
      {"aring", "å"}, {"Ccedilla", "Ç"}, {"ccedilla", "ç"}, {"Eacute", "É"},
      {"eacute", "é"}, {"Egrave", "È"}, {"egrave", "è"}, {"Ecircumflex", "Ê"},
      {"ecircumflex", "ê"}, {"Edieresis", "Ë"}, {"edieresis", "ë"},
      {"Iacute", "Í"}, {"iacute", "í"}, {"Igrave", "Ì"}, {"igrave", "ì"},
      {"Icircumflex", "Î"}, {"icircumflex", "î"}, {"Idieresis", "Ï"},
      {"idieresis", "ï"}, {"Ntilde", "Ñ"}, {"ntilde", "ñ"}, {"Oacute", "Ó"},
      {"oacute", "ó"}, {"Ograve", "Ò"}, {"ograve", "ò"}, {"Ocircumflex", "Ô"},
      {"ocircumflex", "ô"}, {"Odieresis", "Ö"}, {"odieresis", "ö"},
      {"Otilde", "Õ"}, {"otilde", "õ"}, {"Uacute", "Ú"}, {"uacute", "ú"},
      {"Ugrave", "Ù"}, {"ugrave", "ù"}, {"Ucircumflex", "Û"},
      {"ucircumflex", "û"}, {"Udieresis", "Ü"}, {"udieresis", "ü"},
      {"Yacute", "Ý"}, {"yacute", "ý"}, {"Scaron", "Š"}, {"scaron", "š"},
      {"Zcaron", "Ž"}, {"zcaron", "ž"}, {"nbspace", " "}, {"sfthyphen", "-"},
  };
  return names;
}

std::string utf16be_to_utf8(std::string_view bytes) {
  std::string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    char32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xD800 && u <= 0xDBFF && i + 3 < bytes.size()) {
      char32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
    }
    text::append_utf8(out, u);
  }
  return out;
}

std::uint32_t bytes_to_code(std::string_view b) {
  std::uint32_t v = 0;
  for (unsigned char c : b) v = (v << 8) | c;
  return v;
}

bool is_standard_courier(std::string_view base) {
  return base.find("Courier") != std::string_view::npos;
}

}  // namespace

std::string glyph_name_to_unicode(std::string_view name) {
  if (name.size() == 1 && ((name[0] >= 'A' && name[0] <= 'Z') || (name[0] >= 'a' && name[0] <= 'z'))) {
    return std::string(name);
  }
  const auto& names = glyph_names();
  if (auto it = names.find(name); it != names.end()) return std::string(it->second);
  // strip variant suffixes such as "a.sc" or "one.oldstyle"
  if (auto dot = name.find('.'); dot != std::string_view::npos && dot > 0) {
    return glyph_name_to_unicode(name.substr(0, dot));
  }
  auto parse_hex = [](std::string_view h) -> std::string {
    if (h.empty() || h.size() > 6) return {};
    char32_t v = 0;
    for (char c : h) {
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<char32_t>(c - '0');
      else if (c >= 'A' && c <= 'F') v |= static_cast<char32_t>(c - 'A' + 10);
      else if (c >= 'a' && c <= 'f') v |= static_cast<char32_t>(c - 'a' + 10);
      else return {};
    }
    std::string s;
    text::append_utf8(s, v);
    return s;
  };
  if (name.substr(0, 3) == "uni" && name.size() == 7) return parse_hex(name.substr(3));
  if (name.size() >= 5 && name[0] == 'u') return parse_hex(name.substr(1));
  return {};
}

Font::Font() {
  encoding_ = win_ansi();
  has_width_.fill(false);
  widths_.fill(0);
}

Font Font::load(const File& file, const Object& font_obj) {
  Font font;
  const Object resolved = file.resolve(font_obj);
  if (!resolved.is_dict() && !resolved.is_stream()) return font;
  const Dict& d = resolved.dict();
  if (d.get("Subtype").is_name("Type0")) {
    font.load_composite(file, d);
  } else {
    font.load_simple(file, d);
  }
  font.load_to_unicode(file, d);
  return font;
}

void Font::load_descriptor(const File& file, const Dict& d) {
  const Object desc = file.get_resolved(d, "FontDescriptor");
  if (!desc.is_dict()) return;
  const Dict& fd = desc.dict();
  const double asc = file.get_resolved(fd, "Ascent").number() / 1000.0;
  const double dsc = file.get_resolved(fd, "Descent").number() / 1000.0;
  if (asc > 0.3 && asc < 1.5) ascent_ = asc;
  if (dsc < 0 && dsc > -1.0) descent_ = dsc;
  if (auto mw = file.get_resolved(fd, "MissingWidth"); mw.is_number() && mw.number() > 0) {
    default_width_ = mw.number() / 1000.0;
  }
  if ((file.get_resolved(fd, "Flags").integer() & 1) != 0) monospace_ = true;
}

void Font::load_simple(const File& file, const Dict& d) {
  const std::string subtype = d.get("Subtype").is_name() ? d.get("Subtype").name() : "";
  const std::string base = d.get("BaseFont").is_name() ? d.get("BaseFont").name() : "";

  if (subtype == "Type3") {
    const Object fm = file.get_resolved(d, "FontMatrix");
    if (fm.is_array() && !fm.array().empty()) scale_ = file.resolve(fm.array()[0]).number();
  }

  // base encoding
  const Object enc = file.get_resolved(d, "Encoding");
  std::string base_encoding;
  if (enc.is_name()) base_encoding = enc.name();
  if (enc.is_dict() && enc.dict().get("BaseEncoding").is_name()) {
    base_encoding = enc.dict().get("BaseEncoding").name();
  }
  // Fonts without an explicit encoding are read as WinAnsi; producers that
  // rely on a Type1 built-in StandardEncoding only differ in the quote glyphs.
  encoding_ = base_encoding == "StandardEncoding" ? standard() : win_ansi();
  if (enc.is_dict()) {
    const Object diffs = file.get_resolved(enc.dict(), "Differences");
    if (diffs.is_array()) {
      std::int64_t code = 0;
      for (const auto& item : diffs.array()) {
        if (item.is_int()) {
          code = item.integer();
        } else if (item.is_name()) {
          if (code >= 0 && code < 256) {
            std::string u = glyph_name_to_unicode(item.name());
            encoding_[static_cast<std::size_t>(code)] = u.empty() ? std::string(text::kReplacementChar) : u;
          }
          ++code;
        }
      }
    }
  }

  if (is_standard_courier(base)) monospace_ = true;
  load_descriptor(file, d);

  const Object widths = file.get_resolved(d, "Widths");
  if (widths.is_array()) {
    const auto first = file.get_resolved(d, "FirstChar").integer();
    for (std::size_t i = 0; i < widths.array().size(); ++i) {
      const auto code = first + static_cast<std::int64_t>(i);
      if (code < 0 || code > 255) continue;
      widths_[static_cast<std::size_t>(code)] = file.resolve(widths.array()[i]).number() * scale_;
      has_width_[static_cast<std::size_t>(code)] = true;
    }
  }
}

void Font::load_composite(const File& file, const Dict& d) {
  composite_ = true;
  cmap_.bytes = 2;
  default_width_ = 1.0;
  const Object descendants = file.get_resolved(d, "DescendantFonts");
  if (!descendants.is_array() || descendants.array().empty()) return;
  const Object cid = file.resolve(descendants.array()[0]);
  if (!cid.is_dict()) return;
  const Dict& cd = cid.dict();
  load_descriptor(file, cd);
  if (auto dw = file.get_resolved(cd, "DW"); dw.is_number()) default_width_ = dw.number() / 1000.0;
  const Object w = file.get_resolved(cd, "W");
  if (!w.is_array()) return;
  const auto& items = w.array();
  std::size_t i = 0;
  while (i < items.size()) {
    const auto first = file.resolve(items[i]).integer();
    if (i + 1 >= items.size()) break;
    const Object next = file.resolve(items[i + 1]);
    if (next.is_array()) {
      std::int64_t c = first;
      for (const auto& wv : next.array()) cid_widths_[static_cast<std::uint32_t>(c++)] = file.resolve(wv).number() / 1000.0;
      i += 2;
    } else {
      if (i + 2 >= items.size()) break;
      const auto last = next.integer();
      const double width = file.resolve(items[i + 2]).number() / 1000.0;
      for (auto c = first; c <= last && c - first < 65536; ++c) cid_widths_[static_cast<std::uint32_t>(c)] = width;
      i += 3;
    }
  }
}

void Font::load_to_unicode(const File& file, const Dict& d) {
  const Object tu = file.get_resolved(d, "ToUnicode");
  if (!tu.is_stream()) return;
  const std::string data = decode_stream(tu.stream());
  Lexer lex(data);
  std::vector<Object> operands;
  int code_bytes = composite_ ? 2 : 1;
  bool codespace_seen = false;
  while (auto o = lex.next()) {
    if (!o->is_keyword()) {
      operands.push_back(*o);
      continue;
    }
    const std::string& kw = o->keyword();
    if (kw == "endcodespacerange") {
      for (const auto& op : operands) {
        if (op.is_string() && !codespace_seen) {
          code_bytes = static_cast<int>(std::max<std::size_t>(1, op.str().size()));
          codespace_seen = true;
        }
      }
    } else if (kw == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        if (!operands[i].is_string()) continue;
        const auto code = bytes_to_code(operands[i].str());
        if (operands[i + 1].is_string()) {
          cmap_.to_unicode[code] = utf16be_to_utf8(operands[i + 1].str());
        } else if (operands[i + 1].is_name()) {
          cmap_.to_unicode[code] = glyph_name_to_unicode(operands[i + 1].name());
        }
      }
    } else if (kw == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        if (!operands[i].is_string() || !operands[i + 1].is_string()) continue;
        const auto lo = bytes_to_code(operands[i].str());
        const auto hi = bytes_to_code(operands[i + 1].str());
        if (hi < lo || hi - lo > 65535) continue;
        const Object& dst = operands[i + 2];
        if (dst.is_array()) {
          for (std::uint32_t c = lo; c <= hi && c - lo < dst.array().size(); ++c) {
            const Object& item = dst.array()[c - lo];
            if (item.is_string()) cmap_.to_unicode[c] = utf16be_to_utf8(item.str());
          }
        } else if (dst.is_string() && !dst.str().empty()) {
          std::string base = dst.str();
          for (std::uint32_t c = lo; c <= hi; ++c) {
            std::string cur = base;
            std::uint32_t add = c - lo;
            for (std::size_t k = cur.size(); k-- > 0 && add;) {
              const std::uint32_t v = static_cast<unsigned char>(cur[k]) + (add & 0xFF);
              cur[k] = static_cast<char>(v & 0xFF);
              add = (add >> 8) + (v >> 8);
            }
            cmap_.to_unicode[c] = utf16be_to_utf8(cur);
          }
        }
      }
    }
    if (kw.rfind("begin", 0) == 0 || kw.rfind("end", 0) == 0 || kw == "def") operands.clear();
  }
  cmap_.bytes = code_bytes;
  has_to_unicode_ = !cmap_.to_unicode.empty();
}

double Font::simple_width(std::uint32_t code) const {
  if (code < 256 && has_width_[code]) return widths_[code];
  if (monospace_) return 0.6;
  if (code >= 32 && code <= 126) return kHelveticaWidths[code - 32] / 1000.0;
  return default_width_;
}

std::vector<DecodedGlyph> Font::decode(std::string_view bytes) const {
  std::vector<DecodedGlyph> out;
  const std::size_t step = static_cast<std::size_t>(std::max(1, cmap_.bytes));
  for (std::size_t i = 0; i < bytes.size(); i += step) {
    const auto chunk = bytes.substr(i, step);
    const std::uint32_t code = bytes_to_code(chunk);
    DecodedGlyph g;
    if (has_to_unicode_) {
      if (auto it = cmap_.to_unicode.find(code); it != cmap_.to_unicode.end()) g.text = it->second;
    }
    if (g.text.empty() && !composite_ && code < 256) g.text = encoding_[code];
    if (g.text.empty()) g.text = std::string(text::kReplacementChar);
    if (composite_) {
      auto it = cid_widths_.find(code);
      g.width = it != cid_widths_.end() ? it->second : default_width_;
    } else {
      g.width = simple_width(code);
    }
    g.word_space = step == 1 && code == 32;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace surveykg::pdf
