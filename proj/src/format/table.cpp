#include "surveykg/format/table.hpp"

#include <algorithm>
#include <set>

#include "surveykg/csv.hpp"
#include "surveykg/error.hpp"
#include "surveykg/text.hpp"

namespace surveykg::format {

namespace {

constexpr std::string_view kMetadataTag = "[M]";
constexpr std::string_view kReferenceTag = "[REF]";
constexpr std::string_view kDataTag = "[D]";
constexpr std::string_view kResourceTag = "[R]";

void check_col(const SurveyTable& t, std::size_t col) {
  if (col >= t.n_cols()) {
    throw Error(Errc::IndexOutOfRange,
                "column " + std::to_string(col) + " out of range (table has " + std::to_string(t.n_cols()) + ")");
  }
}

void check_row(const SurveyTable& t, std::size_t row) {
  if (row >= t.n_rows()) {
    throw Error(Errc::IndexOutOfRange,
                "row " + std::to_string(row) + " out of range (table has " + std::to_string(t.n_rows()) + ")");
  }
}

std::string join_nonempty(const std::vector<std::string>& parts, std::string_view joiner) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!first) out += joiner;
    out += p;
    first = false;
  }
  return out;
}

bool specs_equal(const std::vector<ColumnSpec>& a, const std::vector<ColumnSpec>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

SurveyTable build(const std::vector<std::string>& header, const std::vector<Row>& rows, bool normalize) {
  auto norm = [&](const std::string& s) { return normalize ? text::nfc(s) : s; };
  std::vector<std::string> h;
  for (const auto& cell : header) h.push_back(norm(cell));
  std::size_t width = h.size();
  for (const auto& r : rows) width = std::max(width, r.size());
  h.resize(width);

  SurveyTable t;
  t.columns = parse_headers(h);
  for (const auto& r : rows) {
    Row out;
    out.reserve(width);
    for (const auto& cell : r) out.push_back(norm(cell));
    out.resize(width);
    t.rows.push_back(std::move(out));
  }
  return t;
}

std::vector<std::vector<std::string>> header_and_rows(const SurveyTable& t) {
  std::vector<std::vector<std::string>> m;
  m.push_back(render_headers(t.columns));
  for (const auto& r : t.rows) {
    Row row = r;
    row.resize(t.n_cols());
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace

std::string_view kind_name(Kind k) { return k == Kind::Resource ? "resource" : "literal"; }

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Reference: return "reference";
    case Role::Data: return "data";
    case Role::Metadata: return "metadata";
  }
  return "";
}

std::optional<std::size_t> SurveyTable::reference_column() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].role == Role::Reference) return i;
  }
  return std::nullopt;
}

bool is_reference_label(std::string_view label) { return text::casefold(text::trim(label)) == "reference"; }

std::vector<ColumnSpec> parse_headers(const std::vector<std::string>& headers) {
  std::vector<ColumnSpec> out;
  bool seen_reference = false;
  for (const auto& h : headers) {
    ColumnSpec c;
    c.source = h;
    std::string_view s = h;
    auto eat = [&](std::string_view tag) {
      if (s.substr(0, tag.size()) != tag) return false;
      s.remove_prefix(tag.size());
      if (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      return true;
    };
    std::optional<Role> tagged;
    if (eat(kMetadataTag)) {
      tagged = Role::Metadata;
    } else if (eat(kReferenceTag)) {
      tagged = Role::Reference;
    } else if (eat(kDataTag)) {
      tagged = Role::Data;
    }
    if (eat(kResourceTag)) c.kind = Kind::Resource;
    if (!s.empty() && s.front() == '\\') s.remove_prefix(1);
    c.label = std::string(s);
    if (tagged) {
      c.role = *tagged;
    } else {
      c.role = is_reference_label(c.label) && !seen_reference ? Role::Reference : Role::Data;
    }
    if (c.role == Role::Reference) seen_reference = true;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> render_headers(const std::vector<ColumnSpec>& columns) {
  std::vector<std::string> canonical;
  bool seen_reference = false;
  for (const auto& c : columns) {
    std::string h;
    if (c.role == Role::Metadata) {
      h = std::string(kMetadataTag) + " ";
    } else if (c.role == Role::Reference) {
      if (!is_reference_label(c.label) || seen_reference) h = std::string(kReferenceTag) + " ";
      seen_reference = true;
    } else if (is_reference_label(c.label)) {
      h = std::string(kDataTag) + " ";
    }
    if (c.kind == Kind::Resource) h += std::string(kResourceTag) + " ";
    if (!c.label.empty() && (c.label.front() == '[' || c.label.front() == '\\' || c.label.front() == ' ')) h += '\\';
    h += c.label;
    canonical.push_back(std::move(h));
  }
  // Prefer each column's original header text when it reads back identically.
  std::vector<std::string> out = canonical;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].source.empty() || columns[i].source == out[i]) continue;
    const std::string keep = out[i];
    out[i] = columns[i].source;
    if (!specs_equal(parse_headers(out), columns)) out[i] = keep;
  }
  return out;
}

SurveyTable table_from_rows(const std::vector<std::string>& header, const std::vector<Row>& rows) {
  return build(header, rows, true);
}

SurveyTable from_grid(const extract::TableGrid& grid) {
  if (grid.n_rows == 0) throw Error(Errc::EmptyGrid, "grid has no rows");
  auto texts = grid.texts();
  const std::vector<std::string> header = texts.front();
  texts.erase(texts.begin());
  return table_from_rows(header, texts);
}

std::vector<Violation> validate(const SurveyTable& t) {
  std::vector<Violation> out;
  if (t.columns.empty()) out.push_back({1, std::nullopt, std::nullopt, "table has no header row"});
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (text::trim(t.columns[c].label).empty()) {
      out.push_back({1, std::nullopt, static_cast<int>(c), "column " + std::to_string(c) + " has an empty label"});
    }
  }
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (t.rows[r].size() != t.n_cols()) {
      out.push_back({2, static_cast<int>(r), std::nullopt,
                     "row " + std::to_string(r) + " has " + std::to_string(t.rows[r].size()) + " cells, expected " +
                         std::to_string(t.n_cols())});
    }
  }
  std::size_t refs = 0;
  for (const auto& c : t.columns) refs += c.role == Role::Reference ? 1 : 0;
  if (refs != 1) {
    out.push_back({3, std::nullopt, std::nullopt,
                   refs == 0 ? "no Reference column" : std::to_string(refs) + " Reference columns, expected one"});
  }
  if (const auto rc = t.reference_column()) {
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const auto& row = t.rows[r];
      if (*rc >= row.size() || text::trim(row[*rc]).empty()) {
        out.push_back({4, static_cast<int>(r), static_cast<int>(*rc), "empty reference cell in row " + std::to_string(r)});
      }
    }
  }
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (t.columns[c].label.find(kResourceTag) != std::string::npos) {
      out.push_back({5, std::nullopt, static_cast<int>(c), "label still carries the [R] marker: " + t.columns[c].label});
    }
  }
  if (t.legend) {
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      for (std::size_t c = 0; c < t.n_cols() && c < t.rows[r].size(); ++c) {
        if (t.columns[c].role != Role::Data) continue;
        const std::string cell = text::trim(t.rows[r][c]);
        if (t.legend->count(cell)) {
          out.push_back({6, static_cast<int>(r), static_cast<int>(c), "unexpanded legend abbreviation '" + cell + "'"});
        }
      }
    }
  }
  return out;
}

SurveyTable transpose(const SurveyTable& t) {
  const auto m = header_and_rows(t);
  std::vector<std::vector<std::string>> tr(t.n_cols(), std::vector<std::string>(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) tr[c][r] = m[r][c];
  }
  if (tr.empty()) return SurveyTable{{}, {}, t.legend};
  const std::vector<std::string> header = tr.front();
  tr.erase(tr.begin());
  SurveyTable out = build(header, tr, false);
  out.legend = t.legend;
  return out;
}

SurveyTable merge_rows(const SurveyTable& t, std::size_t row_a, std::size_t row_b, std::string_view joiner) {
  check_row(t, row_a);
  check_row(t, row_b);
  if (row_a == row_b) throw Error(Errc::MergeShapeMismatch, "cannot merge row " + std::to_string(row_a) + " with itself");
  SurveyTable out = t;
  Row& a = out.rows[row_a];
  const Row& b = t.rows[row_b];
  a.resize(t.n_cols());
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    a[c] = join_nonempty({a[c], c < b.size() ? b[c] : std::string()}, joiner);
  }
  out.rows.erase(out.rows.begin() + static_cast<std::ptrdiff_t>(row_b));
  return out;
}

SurveyTable split_column(const SurveyTable& t, std::size_t col, std::string_view delimiter) {
  check_col(t, col);
  if (delimiter.empty()) throw Error(Errc::UsageError, "split delimiter must not be empty");
  std::vector<std::vector<std::string>> pieces;
  std::size_t width = 1;
  for (const auto& row : t.rows) {
    std::vector<std::string> p;
    for (const auto& s : text::split(col < row.size() ? row[col] : std::string(), delimiter)) p.push_back(text::trim(s));
    width = std::max(width, p.size());
    pieces.push_back(std::move(p));
  }
  if (width == 1) return t;
  const ColumnSpec& orig = t.columns[col];
  std::vector<std::string> labels;
  for (const auto& s : text::split(orig.label, delimiter)) labels.push_back(text::trim(s));
  if (labels.size() != width) {
    labels.clear();
    for (std::size_t k = 0; k < width; ++k) labels.push_back(orig.label + " " + std::to_string(k + 1));
  }
  SurveyTable out = t;
  std::vector<ColumnSpec> cols;
  for (std::size_t k = 0; k < width; ++k) {
    ColumnSpec c;
    c.label = labels[k];
    c.kind = orig.kind;
    c.role = k == 0 ? orig.role : Role::Data;
    cols.push_back(c);
  }
  out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(col));
  out.columns.insert(out.columns.begin() + static_cast<std::ptrdiff_t>(col), cols.begin(), cols.end());
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    Row& row = out.rows[r];
    row.resize(t.n_cols());
    auto p = pieces[r];
    p.resize(width);
    row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
    row.insert(row.begin() + static_cast<std::ptrdiff_t>(col), p.begin(), p.end());
  }
  return out;
}

SurveyTable merge_columns(const SurveyTable& t, const std::vector<std::size_t>& cols, std::string_view joiner,
                          std::string_view new_label) {
  for (auto c : cols) check_col(t, c);
  const std::set<std::size_t> unique(cols.begin(), cols.end());
  if (cols.size() < 2 || unique.size() != cols.size()) {
    throw Error(Errc::MergeShapeMismatch, "merge_columns needs at least two distinct columns");
  }
  const std::size_t at = *unique.begin();
  ColumnSpec merged;
  merged.label = std::string(new_label);
  merged.kind = t.columns[cols.front()].kind;
  merged.role = Role::Data;
  for (auto c : cols) {
    if (t.columns[c].role == Role::Reference) merged.role = Role::Reference;
  }
  SurveyTable out;
  out.legend = t.legend;
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (c == at) {
      out.columns.push_back(merged);
    } else if (!unique.count(c)) {
      out.columns.push_back(t.columns[c]);
    }
  }
  for (const auto& r : t.rows) {
    Row row = r;
    row.resize(t.n_cols());
    std::vector<std::string> parts;
    for (auto c : cols) parts.push_back(row[c]);
    Row next;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (c == at) {
        next.push_back(join_nonempty(parts, joiner));
      } else if (!unique.count(c)) {
        next.push_back(row[c]);
      }
    }
    out.rows.push_back(std::move(next));
  }
  return out;
}

SurveyTable drop_column(const SurveyTable& t, std::size_t col) {
  check_col(t, col);
  SurveyTable out = t;
  out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(col));
  for (auto& row : out.rows) {
    if (col < row.size()) row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
  }
  return out;
}

SurveyTable drop_row(const SurveyTable& t, std::size_t row) {
  check_row(t, row);
  SurveyTable out = t;
  out.rows.erase(out.rows.begin() + static_cast<std::ptrdiff_t>(row));
  return out;
}

SurveyTable set_reference_column(const SurveyTable& t, std::size_t col) {
  check_col(t, col);
  SurveyTable out = t;
  for (auto& c : out.columns) {
    if (c.role == Role::Reference) c.role = Role::Data;
  }
  out.columns[col].role = Role::Reference;
  return out;
}

SurveyTable expand_legend(const SurveyTable& t) {
  if (!t.legend) throw Error(Errc::NoLegend, "table has no legend to expand");
  SurveyTable out = t;
  for (auto& row : out.rows) {
    for (std::size_t c = 0; c < row.size() && c < t.n_cols(); ++c) {
      if (t.columns[c].role != Role::Data) continue;
      const auto it = t.legend->find(text::trim(row[c]));
      if (it != t.legend->end()) row[c] = it->second;
    }
  }
  return out;
}

SurveyTable add_column(const SurveyTable& t, std::string_view label, Kind kind, std::optional<std::size_t> position) {
  const std::size_t at = position.value_or(t.n_cols());
  if (at > t.n_cols()) {
    throw Error(Errc::IndexOutOfRange, "column position " + std::to_string(at) + " out of range");
  }
  SurveyTable out = t;
  ColumnSpec c;
  c.label = text::nfc(label);
  c.kind = kind;
  out.columns.insert(out.columns.begin() + static_cast<std::ptrdiff_t>(at), c);
  for (auto& row : out.rows) {
    row.resize(t.n_cols());
    row.insert(row.begin() + static_cast<std::ptrdiff_t>(at), std::string());
  }
  return out;
}

SurveyTable rename_column(const SurveyTable& t, std::size_t col, std::string_view label) {
  check_col(t, col);
  SurveyTable out = t;
  out.columns[col].label = text::nfc(label);
  out.columns[col].source.clear();
  return out;
}

SurveyTable set_kind(const SurveyTable& t, std::size_t col, Kind kind) {
  check_col(t, col);
  SurveyTable out = t;
  out.columns[col].kind = kind;
  return out;
}

SurveyTable set_cell(const SurveyTable& t, std::size_t row, std::size_t col, std::string_view value) {
  check_row(t, row);
  check_col(t, col);
  SurveyTable out = t;
  out.rows[row].resize(t.n_cols());
  out.rows[row][col] = text::nfc(value);
  return out;
}

SurveyTable set_legend_entry(const SurveyTable& t, std::string_view key, std::string_view expansion) {
  SurveyTable out = t;
  if (!out.legend) out.legend.emplace();
  (*out.legend)[text::nfc(key)] = text::nfc(expansion);
  return out;
}

std::string to_csv(const SurveyTable& t) { return csv::write(header_and_rows(t)); }

SurveyTable from_csv(std::string_view data) {
  auto records = csv::parse(data);
  if (records.empty()) throw Error(Errc::CsvParseError, "missing header row");
  const std::vector<std::string> header = records.front();
  records.erase(records.begin());
  return table_from_rows(header, records);
}

std::filesystem::path legend_path(const std::filesystem::path& table_path) {
  return table_path.parent_path() / (table_path.stem().string() + ".legend.csv");
}

void write_csv(const SurveyTable& t, const std::filesystem::path& path) {
  csv::write_file(path, to_csv(t));
  const auto lp = legend_path(path);
  if (t.legend) {
    std::vector<csv::Record> recs{{"abbreviation", "expansion"}};
    for (const auto& [k, v] : *t.legend) recs.push_back({k, v});
    csv::write_file(lp, csv::write(recs));
  } else {
    std::error_code ec;
    std::filesystem::remove(lp, ec);
  }
}

SurveyTable read_csv(const std::filesystem::path& path) {
  SurveyTable t = from_csv(csv::read_file(path));
  const auto lp = legend_path(path);
  if (std::filesystem::exists(lp)) {
    const auto recs = csv::parse(csv::read_file(lp));
    Legend legend;
    for (std::size_t i = 1; i < recs.size(); ++i) {
      if (recs[i].size() != 2) {
        throw Error(Errc::CsvParseError, lp.string() + ": legend row " + std::to_string(i) + " needs two fields");
      }
      legend[text::nfc(recs[i][0])] = text::nfc(recs[i][1]);
    }
    t.legend = std::move(legend);
  }
  return t;
}

}  // namespace surveykg::format
