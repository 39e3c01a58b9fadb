#pragma once

// Minimal PDF object model, lexer and file reader. Internal to the layout
// module; only what text and ruling extraction needs is supported.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace surveykg::pdf {

struct Ref {
  int num = 0;
  int gen = 0;
  auto operator<=>(const Ref&) const = default;
};

struct Name {
  std::string value;
};

struct Keyword {
  std::string value;
};

struct String {
  std::string bytes;
};

class Object;
struct Dict;
struct StreamData;
using Array = std::vector<Object>;

class Object {
 public:
  using Value = std::variant<std::monostate, bool, std::int64_t, double, String, Name,
                             std::shared_ptr<const Array>, std::shared_ptr<const Dict>,
                             std::shared_ptr<const StreamData>, Ref, Keyword>;

  Object() = default;
  Object(Value v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  const Value& value() const { return value_; }

  bool is_null() const { return std::holds_alternative<std::monostate>(value_); }
  bool is_bool() const { return std::holds_alternative<bool>(value_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_number() const { return is_int() || std::holds_alternative<double>(value_); }
  bool is_string() const { return std::holds_alternative<String>(value_); }
  bool is_name() const { return std::holds_alternative<Name>(value_); }
  bool is_name(std::string_view n) const { return is_name() && name() == n; }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<const Array>>(value_); }
  bool is_dict() const { return std::holds_alternative<std::shared_ptr<const Dict>>(value_); }
  bool is_stream() const { return std::holds_alternative<std::shared_ptr<const StreamData>>(value_); }
  bool is_ref() const { return std::holds_alternative<Ref>(value_); }
  bool is_keyword() const { return std::holds_alternative<Keyword>(value_); }
  bool is_keyword(std::string_view k) const { return is_keyword() && keyword() == k; }

  bool boolean() const { return is_bool() && std::get<bool>(value_); }
  std::int64_t integer() const;
  double number() const;
  const std::string& str() const { return std::get<String>(value_).bytes; }
  const std::string& name() const { return std::get<Name>(value_).value; }
  const std::string& keyword() const { return std::get<Keyword>(value_).value; }
  const Array& array() const { return *std::get<std::shared_ptr<const Array>>(value_); }
  const Dict& dict() const;  // dictionary of a dict or of a stream
  const StreamData& stream() const { return *std::get<std::shared_ptr<const StreamData>>(value_); }
  Ref ref() const { return std::get<Ref>(value_); }

 private:
  Value value_;
};

struct Dict {
  std::map<std::string, Object> entries;

  const Object* find(std::string_view key) const {
    auto it = entries.find(std::string(key));
    return it == entries.end() ? nullptr : &it->second;
  }
  Object get(std::string_view key) const {
    auto* o = find(key);
    return o ? *o : Object{};
  }
};

struct StreamData {
  Dict dict;
  std::string raw;
};

Object make_array(Array a);
Object make_dict(Dict d);

/// Tokenizer and recursive object parser over an in-memory buffer.
class Lexer {
 public:
  explicit Lexer(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool at_end();
  std::string_view data() const { return data_; }

  void skip_whitespace();

  /// Reads one object. Arrays and dictionaries are parsed recursively;
  /// `n g R` is folded into a Ref. Bare words come back as Keywords.
  /// Returns nullopt at end of input.
  std::optional<Object> next();

  /// Resolves stream /Length values that are indirect references.
  std::function<std::optional<std::int64_t>(Ref)> length_resolver;

 private:
  std::optional<Object> next_primitive();
  Object parse_number();
  Object parse_literal_string();
  Object parse_hex_string();
  Object parse_name();
  Object parse_word();
  Object parse_array();
  Object parse_dict();
  std::optional<Object> maybe_stream(Dict dict);

  std::string_view data_;
  std::size_t pos_ = 0;
};

bool is_pdf_whitespace(char c);
bool is_pdf_delimiter(char c);

std::string decode_stream(const StreamData& stream);

/// Random-access reader over a whole PDF file held in memory.
class File {
 public:
  /// Throws Error{NotAPdf}, Error{MalformedPdf}.
  explicit File(std::string bytes);

  const Dict& trailer() const { return trailer_; }
  Object resolve(const Object& o) const;
  Object get(Ref ref) const;
  Object get_resolved(const Dict& d, std::string_view key) const { return resolve(d.get(key)); }

 private:
  struct Entry {
    std::size_t offset = 0;
    int stream_num = -1;  // >= 0 when stored in an object stream
    int index = 0;
  };

  bool read_xref_chain(std::size_t offset);
  bool read_xref_table(Lexer& lex);
  bool read_xref_stream(const Object& obj);
  void rebuild_by_scanning();
  Object parse_at(std::size_t offset) const;
  Object parse_from_object_stream(int stream_num, int index) const;

  std::string bytes_;
  Dict trailer_;
  std::unordered_map<int, Entry> xref_;
  mutable std::map<int, Object> cache_;
  mutable int depth_ = 0;
};

}  // namespace surveykg::pdf
