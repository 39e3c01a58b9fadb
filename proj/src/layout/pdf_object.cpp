#include "pdf_object.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <set>

#include "surveykg/error.hpp"

namespace surveykg::pdf {

std::int64_t Object::integer() const {
  if (is_int()) return std::get<std::int64_t>(value_);
  if (std::holds_alternative<double>(value_)) return static_cast<std::int64_t>(std::get<double>(value_));
  return 0;
}

double Object::number() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(value_));
  if (std::holds_alternative<double>(value_)) return std::get<double>(value_);
  return 0.0;
}

const Dict& Object::dict() const {
  if (is_stream()) return stream().dict;
  return *std::get<std::shared_ptr<const Dict>>(value_);
}

Object make_array(Array a) { return Object(std::make_shared<const Array>(std::move(a))); }
Object make_dict(Dict d) { return Object(std::make_shared<const Dict>(std::move(d))); }

bool is_pdf_whitespace(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

bool is_pdf_delimiter(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

// ---------------------------------------------------------------------------
// Lexer

bool Lexer::at_end() {
  skip_whitespace();
  return pos_ >= data_.size();
}

void Lexer::skip_whitespace() {
  while (pos_ < data_.size()) {
    char c = data_[pos_];
    if (is_pdf_whitespace(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

std::optional<Object> Lexer::next() {
  auto obj = next_primitive();
  if (!obj || !obj->is_int() || obj->integer() < 0) return obj;

  // `num gen R`
  const std::size_t save = pos_;
  skip_whitespace();
  std::size_t p = pos_;
  while (p < data_.size() && is_digit(data_[p])) ++p;
  if (p > pos_ && p < data_.size() && is_pdf_whitespace(data_[p])) {
    const int gen = std::atoi(std::string(data_.substr(pos_, p - pos_)).c_str());
    std::size_t q = p;
    while (q < data_.size() && is_pdf_whitespace(data_[q])) ++q;
    if (q < data_.size() && data_[q] == 'R' &&
        (q + 1 >= data_.size() || is_pdf_whitespace(data_[q + 1]) || is_pdf_delimiter(data_[q + 1]))) {
      pos_ = q + 1;
      return Object(Ref{static_cast<int>(obj->integer()), gen});
    }
  }
  pos_ = save;
  return obj;
}

std::optional<Object> Lexer::next_primitive() {
  skip_whitespace();
  if (pos_ >= data_.size()) return std::nullopt;
  const char c = data_[pos_];
  switch (c) {
    case '[':
      ++pos_;
      return parse_array();
    case ']':
      ++pos_;
      return Object(Keyword{"]"});
    case '<':
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
        pos_ += 2;
        return parse_dict();
      }
      ++pos_;
      return parse_hex_string();
    case '>':
      pos_ += (pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') ? 2 : 1;
      return Object(Keyword{">>"});
    case '(':
      ++pos_;
      return parse_literal_string();
    case '/':
      ++pos_;
      return parse_name();
    case '{':
    case '}':
    case ')':
      ++pos_;
      return Object(Keyword{std::string(1, c)});
    default:
      break;
  }
  if (is_digit(c) || c == '+' || c == '-' || c == '.') return parse_number();
  return parse_word();
}

Object Lexer::parse_number() {
  const std::size_t start = pos_;
  bool real = false;
  if (data_[pos_] == '+' || data_[pos_] == '-') ++pos_;
  while (pos_ < data_.size() && (data_[pos_] == '-' || data_[pos_] == '+')) ++pos_;  // "--5" seen in the wild
  while (pos_ < data_.size() && (is_digit(data_[pos_]) || data_[pos_] == '.')) {
    if (data_[pos_] == '.') real = true;
    ++pos_;
  }
  std::string text(data_.substr(start, pos_ - start));
  // collapse repeated signs
  bool negative = false;
  std::size_t k = 0;
  while (k < text.size() && (text[k] == '-' || text[k] == '+')) {
    if (text[k] == '-') negative = !negative;
    ++k;
  }
  std::string digits = text.substr(k);
  if (digits.empty() || digits == ".") return Object(std::int64_t{0});
  if (real) {
    double v = std::strtod(digits.c_str(), nullptr);
    return Object(negative ? -v : v);
  }
  std::int64_t v = std::strtoll(digits.c_str(), nullptr, 10);
  return Object(negative ? -v : v);
}

Object Lexer::parse_literal_string() {
  std::string out;
  int depth = 1;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '\\') {
      if (pos_ >= data_.size()) break;
      char e = data_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '(': out.push_back('('); break;
        case ')': out.push_back(')'); break;
        case '\\': out.push_back('\\'); break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          break;
        case '\n':
          break;
        default:
          if (e >= '0' && e <= '7') {
            int v = e - '0';
            for (int i = 0; i < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++i) {
              v = v * 8 + (data_[pos_++] - '0');
            }
            out.push_back(static_cast<char>(v & 0xFF));
          } else {
            out.push_back(e);
          }
      }
    } else if (c == '(') {
      ++depth;
      out.push_back(c);
    } else if (c == ')') {
      if (--depth == 0) break;
      out.push_back(c);
    } else if (c == '\r') {
      if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
      out.push_back('\n');
    } else {
      out.push_back(c);
    }
  }
  return Object(String{std::move(out)});
}

Object Lexer::parse_hex_string() {
  std::string out;
  int pending = -1;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '>') break;
    int v = hex_value(c);
    if (v < 0) continue;
    if (pending < 0) {
      pending = v;
    } else {
      out.push_back(static_cast<char>(pending * 16 + v));
      pending = -1;
    }
  }
  if (pending >= 0) out.push_back(static_cast<char>(pending * 16));
  return Object(String{std::move(out)});
}

Object Lexer::parse_name() {
  std::string out;
  while (pos_ < data_.size()) {
    char c = data_[pos_];
    if (is_pdf_whitespace(c) || is_pdf_delimiter(c)) break;
    ++pos_;
    if (c == '#' && pos_ + 1 < data_.size() && hex_value(data_[pos_]) >= 0 && hex_value(data_[pos_ + 1]) >= 0) {
      out.push_back(static_cast<char>(hex_value(data_[pos_]) * 16 + hex_value(data_[pos_ + 1])));
      pos_ += 2;
    } else {
      out.push_back(c);
    }
  }
  return Object(Name{std::move(out)});
}

Object Lexer::parse_word() {
  const std::size_t start = pos_;
  while (pos_ < data_.size() && !is_pdf_whitespace(data_[pos_]) && !is_pdf_delimiter(data_[pos_])) ++pos_;
  if (pos_ == start) ++pos_;  // lone unexpected delimiter
  std::string word(data_.substr(start, pos_ - start));
  if (word == "true") return Object(true);
  if (word == "false") return Object(false);
  if (word == "null") return Object();
  return Object(Keyword{std::move(word)});
}

Object Lexer::parse_array() {
  Array items;
  while (true) {
    auto o = next();
    if (!o || o->is_keyword("]")) break;
    items.push_back(std::move(*o));
  }
  return make_array(std::move(items));
}

Object Lexer::parse_dict() {
  Dict dict;
  while (true) {
    auto key = next();
    if (!key || key->is_keyword(">>")) break;
    if (!key->is_name()) continue;
    auto value = next();
    if (!value || value->is_keyword(">>")) break;
    dict.entries[key->name()] = std::move(*value);
  }
  if (auto s = maybe_stream(dict)) return *s;
  return make_dict(std::move(dict));
}

std::optional<Object> Lexer::maybe_stream(Dict dict) {
  std::size_t p = pos_;
  while (p < data_.size() && is_pdf_whitespace(data_[p])) ++p;
  if (data_.substr(p, 6) != "stream") return std::nullopt;
  p += 6;
  if (p < data_.size() && data_[p] == '\r') ++p;
  if (p < data_.size() && data_[p] == '\n') ++p;

  std::optional<std::int64_t> length;
  if (auto* len = dict.find("Length")) {
    if (len->is_int()) {
      length = len->integer();
    } else if (len->is_ref() && length_resolver) {
      length = length_resolver(len->ref());
    }
  }

  std::size_t end = std::string_view::npos;
  if (length && *length >= 0 && p + static_cast<std::size_t>(*length) <= data_.size()) {
    std::size_t q = p + static_cast<std::size_t>(*length);
    std::size_t r = q;
    while (r < data_.size() && is_pdf_whitespace(data_[r])) ++r;
    if (data_.substr(r, 9) == "endstream") {
      end = q;
      pos_ = r + 9;
    }
  }
  if (end == std::string_view::npos) {
    auto found = data_.find("endstream", p);
    if (found == std::string_view::npos) found = data_.size();
    end = found;
    pos_ = std::min(data_.size(), found + 9);
    if (end > p && data_[end - 1] == '\n') --end;
    if (end > p && data_[end - 1] == '\r') --end;
  }
  auto stream = std::make_shared<StreamData>();
  stream->dict = std::move(dict);
  stream->raw = std::string(data_.substr(p, end - p));
  return Object(std::shared_ptr<const StreamData>(std::move(stream)));
}

// ---------------------------------------------------------------------------
// Filters

namespace {

std::string inflate(std::string_view in) {
  std::string out;
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) return out;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  char buf[16384];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof(buf) - zs.avail_out);
  } while (rc == Z_OK && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  // Truncated or corrupt data keeps whatever decoded cleanly.
  return out;
}

std::string apply_predictor(const std::string& data, const Dict& parms) {
  const auto predictor = parms.get("Predictor").integer();
  if (predictor < 10) return data;
  const int colors = parms.find("Colors") ? static_cast<int>(parms.get("Colors").integer()) : 1;
  const int bpc = parms.find("BitsPerComponent") ? static_cast<int>(parms.get("BitsPerComponent").integer()) : 8;
  const int columns = parms.find("Columns") ? static_cast<int>(parms.get("Columns").integer()) : 1;
  const std::size_t bpp = std::max<std::size_t>(1, static_cast<std::size_t>(colors * bpc + 7) / 8);
  const std::size_t row_len = static_cast<std::size_t>(colors * bpc * columns + 7) / 8;
  if (row_len == 0) return data;

  std::string out;
  std::vector<unsigned char> prev(row_len, 0), cur(row_len);
  std::size_t i = 0;
  while (i < data.size()) {
    const int type = static_cast<unsigned char>(data[i++]);
    const std::size_t n = std::min(row_len, data.size() - i);
    for (std::size_t k = 0; k < row_len; ++k) cur[k] = k < n ? static_cast<unsigned char>(data[i + k]) : 0;
    i += n;
    for (std::size_t k = 0; k < row_len; ++k) {
      const int left = k >= bpp ? cur[k - bpp] : 0;
      const int up = prev[k];
      const int upleft = k >= bpp ? prev[k - bpp] : 0;
      int v = cur[k];
      switch (type) {
        case 1: v += left; break;
        case 2: v += up; break;
        case 3: v += (left + up) / 2; break;
        case 4: {
          const int p = left + up - upleft;
          const int pa = std::abs(p - left), pb = std::abs(p - up), pc = std::abs(p - upleft);
          v += (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : upleft);
          break;
        }
        default: break;
      }
      cur[k] = static_cast<unsigned char>(v & 0xFF);
    }
    out.append(reinterpret_cast<const char*>(cur.data()), n);
    prev = cur;
  }
  return out;
}

std::string ascii_hex(std::string_view in) {
  std::string out;
  int pending = -1;
  for (char c : in) {
    if (c == '>') break;
    int v = hex_value(c);
    if (v < 0) continue;
    if (pending < 0) {
      pending = v;
    } else {
      out.push_back(static_cast<char>(pending * 16 + v));
      pending = -1;
    }
  }
  if (pending >= 0) out.push_back(static_cast<char>(pending * 16));
  return out;
}

std::string ascii85(std::string_view in) {
  std::string out;
  std::uint32_t tuple = 0;
  int count = 0;
  std::size_t i = 0;
  if (in.substr(0, 2) == "<~") i = 2;
  for (; i < in.size(); ++i) {
    char c = in[i];
    if (c == '~') break;
    if (is_pdf_whitespace(c)) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') continue;
    tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int k = 3; k >= 0; --k) out.push_back(static_cast<char>((tuple >> (8 * k)) & 0xFF));
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> (8 * (3 - k))) & 0xFF));
  }
  return out;
}

std::string lzw(std::string_view in, bool early_change) {
  std::string out;
  std::vector<std::string> table;
  auto reset = [&] {
    table.clear();
    for (int i = 0; i < 256; ++i) table.emplace_back(1, static_cast<char>(i));
    table.emplace_back();  // 256 clear
    table.emplace_back();  // 257 eod
  };
  reset();
  int code_len = 9;
  std::uint32_t buffer = 0;
  int bits = 0;
  std::string prev;
  for (unsigned char byte : in) {
    buffer = (buffer << 8) | byte;
    bits += 8;
    while (bits >= code_len) {
      const int code = static_cast<int>((buffer >> (bits - code_len)) & ((1u << code_len) - 1));
      bits -= code_len;
      if (code == 256) {
        reset();
        code_len = 9;
        prev.clear();
        continue;
      }
      if (code == 257) return out;
      std::string entry;
      if (code < static_cast<int>(table.size())) {
        entry = table[static_cast<std::size_t>(code)];
      } else if (!prev.empty()) {
        entry = prev + prev[0];
      } else {
        return out;
      }
      out += entry;
      if (!prev.empty()) table.push_back(prev + entry[0]);
      prev = entry;
      const int limit = static_cast<int>(table.size()) + (early_change ? 1 : 0);
      if (limit >= (1 << code_len) && code_len < 12) ++code_len;
    }
  }
  return out;
}

std::string run_length(std::string_view in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    const int len = static_cast<unsigned char>(in[i++]);
    if (len == 128) break;
    if (len < 128) {
      const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(len) + 1, in.size() - i);
      out.append(in.substr(i, n));
      i += n;
    } else if (i < in.size()) {
      out.append(static_cast<std::size_t>(257 - len), in[i++]);
    }
  }
  return out;
}

}  // namespace

std::string decode_stream(const StreamData& stream) {
  std::vector<std::string> filters;
  std::vector<Dict> parms;
  const Object f = stream.dict.get("Filter");
  const Object p = stream.dict.get("DecodeParms");
  if (f.is_name()) {
    filters.push_back(f.name());
    parms.push_back(p.is_dict() ? p.dict() : Dict{});
  } else if (f.is_array()) {
    for (std::size_t i = 0; i < f.array().size(); ++i) {
      if (!f.array()[i].is_name()) continue;
      filters.push_back(f.array()[i].name());
      Dict d;
      if (p.is_array() && i < p.array().size() && p.array()[i].is_dict()) d = p.array()[i].dict();
      parms.push_back(std::move(d));
    }
  }

  std::string data = stream.raw;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const auto& name = filters[i];
    if (name == "FlateDecode" || name == "Fl") {
      data = apply_predictor(inflate(data), parms[i]);
    } else if (name == "ASCIIHexDecode" || name == "AHx") {
      data = ascii_hex(data);
    } else if (name == "ASCII85Decode" || name == "A85") {
      data = ascii85(data);
    } else if (name == "LZWDecode" || name == "LZW") {
      const bool early = !parms[i].find("EarlyChange") || parms[i].get("EarlyChange").integer() != 0;
      data = apply_predictor(lzw(data, early), parms[i]);
    } else if (name == "RunLengthDecode" || name == "RL") {
      data = run_length(data);
    } else {
      // image codecs (DCT, JBIG2, CCITT, JPX) carry no text
      return {};
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// File

File::File(std::string bytes) : bytes_(std::move(bytes)) {
  const auto header = std::string_view(bytes_).substr(0, 1024).find("%PDF-");
  if (header == std::string_view::npos) throw Error(Errc::NotAPdf, "missing %PDF- header");

  bool ok = false;
  const auto sx = std::string_view(bytes_).rfind("startxref");
  if (sx != std::string_view::npos) {
    Lexer lex(bytes_, sx + 9);
    auto off = lex.next();
    if (off && off->is_int() && off->integer() >= 0 && static_cast<std::size_t>(off->integer()) < bytes_.size()) {
      try {
        ok = read_xref_chain(static_cast<std::size_t>(off->integer()) + header);
        if (!ok && header != 0) ok = read_xref_chain(static_cast<std::size_t>(off->integer()));
      } catch (const Error&) {
        ok = false;
      }
    }
  }
  if (!ok || !trailer_.find("Root")) {
    xref_.clear();
    trailer_ = Dict{};
    rebuild_by_scanning();
  }
  if (!trailer_.find("Root")) throw Error(Errc::MalformedPdf, "no document catalog");
}

bool File::read_xref_chain(std::size_t offset) {
  std::set<std::size_t> visited;
  bool first = true;
  while (offset < bytes_.size() && visited.insert(offset).second) {
    Lexer lex(bytes_, offset);
    lex.skip_whitespace();
    Dict section_trailer;
    if (std::string_view(bytes_).substr(lex.pos(), 4) == "xref") {
      lex.seek(lex.pos() + 4);
      if (!read_xref_table(lex)) return false;
      auto t = lex.next();
      if (!t || !t->is_dict()) return false;
      section_trailer = t->dict();
      if (auto* hybrid = section_trailer.find("XRefStm"); hybrid && hybrid->is_int()) {
        Lexer hl(bytes_, static_cast<std::size_t>(hybrid->integer()));
        hl.next();
        hl.next();
        auto kw = hl.next();
        auto obj = hl.next();
        if (kw && kw->is_keyword("obj") && obj) read_xref_stream(*obj);
      }
    } else {
      auto num = lex.next();
      auto gen = lex.next();
      auto kw = lex.next();
      if (!num || !gen || !kw || !kw->is_keyword("obj")) return false;
      auto obj = lex.next();
      if (!obj || !obj->is_stream() || !read_xref_stream(*obj)) return false;
      section_trailer = obj->dict();
    }
    for (auto& [k, v] : section_trailer.entries) {
      if (first || !trailer_.find(k)) trailer_.entries[k] = v;
    }
    first = false;
    auto prev = section_trailer.get("Prev");
    if (!prev.is_int()) break;
    offset = static_cast<std::size_t>(prev.integer());
  }
  return true;
}

bool File::read_xref_table(Lexer& lex) {
  while (true) {
    const std::size_t save = lex.pos();
    auto start = lex.next();
    if (!start) return false;
    if (start->is_keyword("trailer")) return true;
    auto count = lex.next();
    if (!start->is_int() || !count || !count->is_int()) {
      lex.seek(save);
      return false;
    }
    for (std::int64_t i = 0; i < count->integer(); ++i) {
      auto off = lex.next();
      auto gen = lex.next();
      auto kind = lex.next();
      if (!off || !gen || !kind || !kind->is_keyword()) return false;
      const int num = static_cast<int>(start->integer() + i);
      if (kind->keyword() == "n" && !xref_.count(num) && off->integer() > 0) {
        xref_[num] = Entry{static_cast<std::size_t>(off->integer()), -1, 0};
      }
    }
  }
}

bool File::read_xref_stream(const Object& obj) {
  if (!obj.is_stream()) return false;
  const Dict& d = obj.dict();
  if (!d.get("Type").is_name("XRef")) return false;
  const Object w = d.get("W");
  if (!w.is_array() || w.array().size() < 3) return false;
  int widths[3];
  for (int k = 0; k < 3; ++k) widths[k] = static_cast<int>(w.array()[static_cast<std::size_t>(k)].integer());
  std::vector<std::int64_t> index;
  if (auto idx = d.get("Index"); idx.is_array()) {
    for (const auto& o : idx.array()) index.push_back(o.integer());
  } else {
    index = {0, d.get("Size").integer()};
  }
  const std::string data = decode_stream(obj.stream());
  const std::size_t rec = static_cast<std::size_t>(widths[0] + widths[1] + widths[2]);
  if (rec == 0) return false;
  std::size_t pos = 0;
  auto field = [&](int width, std::int64_t dflt) {
    if (width == 0) return dflt;
    std::int64_t v = 0;
    for (int k = 0; k < width; ++k) v = (v << 8) | static_cast<unsigned char>(data[pos++]);
    return v;
  };
  for (std::size_t s = 0; s + 1 < index.size(); s += 2) {
    for (std::int64_t i = 0; i < index[s + 1]; ++i) {
      if (pos + rec > data.size()) return true;
      const auto type = field(widths[0], 1);
      const auto f2 = field(widths[1], 0);
      const auto f3 = field(widths[2], 0);
      const int num = static_cast<int>(index[s] + i);
      if (xref_.count(num)) continue;
      if (type == 1 && f2 > 0) {
        xref_[num] = Entry{static_cast<std::size_t>(f2), -1, 0};
      } else if (type == 2) {
        xref_[num] = Entry{0, static_cast<int>(f2), static_cast<int>(f3)};
      }
    }
  }
  return true;
}

void File::rebuild_by_scanning() {
  const std::string_view data(bytes_);
  std::vector<int> object_streams;
  std::size_t pos = 0;
  while ((pos = data.find("obj", pos)) != std::string_view::npos) {
    const std::size_t obj_kw = pos;
    pos += 3;
    if (pos < data.size() && !is_pdf_whitespace(data[pos]) && !is_pdf_delimiter(data[pos])) continue;
    // walk back over "num gen "
    std::size_t p = obj_kw;
    auto back_ws = [&] { while (p > 0 && is_pdf_whitespace(data[p - 1])) --p; };
    auto back_digits = [&] {
      const std::size_t end = p;
      while (p > 0 && is_digit(data[p - 1])) --p;
      return end - p;
    };
    back_ws();
    if (back_digits() == 0) continue;
    back_ws();
    const std::size_t num_end = p;
    if (back_digits() == 0) continue;
    if (p > 0 && !is_pdf_whitespace(data[p - 1]) && !is_pdf_delimiter(data[p - 1])) continue;
    const int num = std::atoi(std::string(data.substr(p, num_end - p)).c_str());
    xref_[num] = Entry{p, -1, 0};
  }
  // trailers, newest last
  pos = 0;
  while ((pos = data.find("trailer", pos)) != std::string_view::npos) {
    Lexer lex(bytes_, pos + 7);
    auto t = lex.next();
    if (t && t->is_dict()) {
      for (auto& [k, v] : t->dict().entries) trailer_.entries[k] = v;
    }
    pos += 7;
  }
  for (auto& [num, entry] : std::map<int, Entry>(xref_.begin(), xref_.end())) {
    Object o = parse_at(entry.offset);
    if (!o.is_dict() && !o.is_stream()) continue;
    const Dict& d = o.dict();
    if (d.get("Type").is_name("XRef")) {
      for (auto& [k, v] : d.entries) {
        if (!trailer_.find(k)) trailer_.entries[k] = v;
      }
    } else if (d.get("Type").is_name("ObjStm")) {
      object_streams.push_back(num);
    } else if (d.get("Type").is_name("Catalog") && !trailer_.find("Root")) {
      trailer_.entries["Root"] = Object(Ref{num, 0});
    }
  }
  for (int stream_num : object_streams) {
    Object so = get(Ref{stream_num, 0});
    if (!so.is_stream()) continue;
    const std::string body = decode_stream(so.stream());
    Lexer lex(body);
    const auto n = so.dict().get("N").integer();
    for (std::int64_t i = 0; i < n; ++i) {
      auto num = lex.next();
      auto off = lex.next();
      if (!num || !off) break;
      const int id = static_cast<int>(num->integer());
      if (!xref_.count(id)) xref_[id] = Entry{0, stream_num, static_cast<int>(i)};
    }
  }
  // the catalog may live inside an object stream
  if (!trailer_.find("Root")) {
    for (auto& [num, entry] : std::map<int, Entry>(xref_.begin(), xref_.end())) {
      if (entry.stream_num < 0) continue;
      Object o = get(Ref{num, 0});
      if (o.is_dict() && o.dict().get("Type").is_name("Catalog")) {
        trailer_.entries["Root"] = Object(Ref{num, 0});
        break;
      }
    }
  }
}

Object File::parse_at(std::size_t offset) const {
  if (offset >= bytes_.size()) return {};
  Lexer lex(bytes_, offset);
  lex.length_resolver = [this](Ref r) -> std::optional<std::int64_t> {
    Object o = get(r);
    if (o.is_int()) return o.integer();
    return std::nullopt;
  };
  auto num = lex.next();
  auto gen = lex.next();
  auto kw = lex.next();
  if (!num || !gen || !kw || !kw->is_keyword("obj")) return {};
  auto obj = lex.next();
  return obj ? *obj : Object{};
}

Object File::parse_from_object_stream(int stream_num, int index) const {
  Object so = get(Ref{stream_num, 0});
  if (!so.is_stream()) return {};
  const std::string body = decode_stream(so.stream());
  const auto n = so.dict().get("N").integer();
  const auto first = so.dict().get("First").integer();
  Lexer header(body);
  std::size_t offset = 0;
  bool found = false;
  for (std::int64_t i = 0; i < n; ++i) {
    auto num = header.next();
    auto off = header.next();
    if (!num || !off) break;
    if (i == index) {
      offset = static_cast<std::size_t>(first + off->integer());
      found = true;
      break;
    }
  }
  if (!found || offset >= body.size()) return {};
  Lexer lex(body, offset);
  auto obj = lex.next();
  return obj ? *obj : Object{};
}

Object File::get(Ref ref) const {
  if (auto it = cache_.find(ref.num); it != cache_.end()) return it->second;
  auto it = xref_.find(ref.num);
  if (it == xref_.end() || depth_ > 32) return {};
  ++depth_;
  Object o;
  try {
    o = it->second.stream_num >= 0 ? parse_from_object_stream(it->second.stream_num, it->second.index)
                                   : parse_at(it->second.offset);
  } catch (...) {
    --depth_;
    throw;
  }
  --depth_;
  cache_[ref.num] = o;
  return o;
}

Object File::resolve(const Object& o) const {
  Object cur = o;
  for (int i = 0; i < 16 && cur.is_ref(); ++i) cur = get(cur.ref());
  return cur.is_ref() ? Object{} : cur;
}

}  // namespace surveykg::pdf
