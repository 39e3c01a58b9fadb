#include <filesystem>
#include <random>

#include "csv_oracle.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "random_tables.hpp"
#include "surveykg/csv.hpp"
#include "surveykg/error.hpp"
#include "surveykg/extract/extract.hpp"
#include "surveykg/format/edits.hpp"
#include "surveykg/format/table.hpp"
#include "surveykg/layout/layout.hpp"

using namespace surveykg;
using namespace surveykg::format;

namespace {

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::UsageError;
}

SurveyTable table(const std::vector<std::vector<std::string>>& rows) {
  return from_grid(extract::grid_from_texts(rows));
}

std::vector<int> rules(const std::vector<Violation>& v) {
  std::vector<int> out;
  for (const auto& x : v) out.push_back(x.rule);
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("surveykg_test_format_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string oracle_trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

TEST_CASE("from_grid reads the header grammar") {
  const SurveyTable t = table({{"Reference", "[R] Method"}, {"[5]", "SVM"}});
  REQUIRE(t.n_cols() == 2);
  CHECK(t.columns[0] == ColumnSpec{"Reference", Kind::Literal, Role::Reference, ""});
  CHECK(t.columns[1] == ColumnSpec{"Method", Kind::Resource, Role::Data, ""});
  CHECK(t.rows == std::vector<Row>{{"[5]", "SVM"}});
  CHECK(validate(t).empty());

  CHECK(table({{"Reference", "A"}}).n_rows() == 0);
  CHECK(error_of([] { from_grid(extract::TableGrid{}); }) == Errc::EmptyGrid);

  const SurveyTable no_ref = table({{"A", "B"}, {"1", "2"}});
  CHECK(no_ref.columns[0].role == Role::Data);
  CHECK(no_ref.columns[1].role == Role::Data);
  CHECK(rules(validate(no_ref)) == std::vector<int>{3});
}

TEST_CASE("resource marker with or without a space, case-insensitive reference label") {
  const SurveyTable t = table({{"reference", "[R]Method", "[R]  Odd"}, {"1", "x", "y"}});
  CHECK(t.columns[0].role == Role::Reference);
  CHECK(t.columns[1].label == "Method");
  CHECK(t.columns[1].kind == Kind::Resource);
  CHECK(t.columns[2].label == " Odd");
  // original header spelling is kept on write
  CHECK(to_csv(t) == "reference,[R]Method,[R]  Odd\n1,x,y\n");
}

TEST_CASE("only the first untagged Reference column takes the role") {
  const SurveyTable t = table({{"Reference", "Reference"}, {"1", "2"}});
  CHECK(t.columns[0].role == Role::Reference);
  CHECK(t.columns[1].role == Role::Data);
  auto cols = t.columns;
  for (auto& c : cols) c.source.clear();
  CHECK(render_headers(cols) == std::vector<std::string>{"Reference", "[D] Reference"});
  CHECK(render_headers(t.columns) == std::vector<std::string>{"Reference", "Reference"});
}

TEST_CASE("render and parse headers are inverse") {
  const std::vector<ColumnSpec> cols = {
      {"Reference", Kind::Literal, Role::Data, ""},  {"Key", Kind::Literal, Role::Reference, ""},
      {"Title", Kind::Literal, Role::Metadata, ""},  {"[R] odd", Kind::Resource, Role::Data, ""},
      {"\\path", Kind::Literal, Role::Data, ""},     {" lead", Kind::Literal, Role::Data, ""},
      {"", Kind::Resource, Role::Metadata, ""},      {"reference", Kind::Literal, Role::Reference, ""},
  };
  const auto headers = render_headers(cols);
  CHECK(headers[0] == "[D] Reference");
  CHECK(headers[1] == "[REF] Key");
  CHECK(headers[2] == "[M] Title");
  CHECK(headers[3] == "[R] \\[R] odd");
  CHECK(headers[7] == "[REF] reference");
  const auto parsed = parse_headers(headers);
  REQUIRE(parsed.size() == cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) CHECK(parsed[i] == cols[i]);
}

TEST_CASE("validate rules 1 to 6") {
  SurveyTable t = table({{"Reference", "Method"}, {"[1]", "acc"}, {"[2]", "x"}, {"[3]", "y"}, {"[4]", "z"}, {"", "w"}});
  auto v = validate(t);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == 4);
  CHECK(v[0].row == 4);

  t = set_cell(t, 4, 0, "[5]");
  CHECK(validate(t).empty());
  t = set_legend_entry(t, "acc", "accuracy");
  v = validate(t);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == 6);
  CHECK(v[0].row == 0);
  CHECK(v[0].column == 1);
  CHECK(validate(expand_legend(t)).empty());

  SurveyTable bad = t;
  bad.columns[1].label = " ";
  bad.columns.push_back({"Tag [R]", Kind::Literal, Role::Data, ""});
  bad.rows[0].push_back("extra");
  const auto r = rules(validate(bad));
  CHECK(std::count(r.begin(), r.end(), 1) == 1);
  CHECK(std::count(r.begin(), r.end(), 2) == 4);
  CHECK(std::count(r.begin(), r.end(), 5) == 1);
}

TEST_CASE("transpose example and involution on fixtures") {
  const SurveyTable t = table({{"Reference", "A", "B"}, {"r1", "1", "2"}});
  const SurveyTable tt = transpose(t);
  CHECK(tt.n_cols() == 2);
  CHECK(tt.n_rows() == 2);
  CHECK(tt.columns[0].label == "Reference");
  CHECK(tt.columns[1].label == "r1");
  CHECK(tt.rows == std::vector<Row>{{"A", "1"}, {"B", "2"}});
  CHECK(transpose(tt) == t);
}

TEST_CASE("merge_rows repairs the wrapped-row fixture") {
  const auto& fx = testing::table_fixture("wrapped_row");
  const auto doc = layout::load_document_from_memory(fx.pdf, "w.pdf");
  SurveyTable t = from_grid(extract::extract_stream(doc.pages[0], fx.regions[0]));
  // rows 1 and 4 carry continuation lines
  t = merge_rows(t, 3, 4, " ");
  t = merge_rows(t, 0, 1, " ");
  const auto logical = testing::flatten_lines({{"Reference", "Method", "Description"},
                                               {"[33]", "Tabula", "Stream and lattice\nextraction of PDF tables"},
                                               {"[34]", "Camelot", "Configurable extraction"},
                                               {"[35]", "Grobid", "Header and reference\nparsing with CRF"},
                                               {"[36]", "Cermine", "Metadata extraction"}});
  CHECK(t == table(logical));
  CHECK(validate(t).empty());
  CHECK(error_of([&] { merge_rows(t, 1, 1, " "); }) == Errc::MergeShapeMismatch);
  CHECK(error_of([&] { merge_rows(t, 1, 9, " "); }) == Errc::IndexOutOfRange);
}

TEST_CASE("split and merge columns") {
  const SurveyTable t = table({{"Reference", "Method/Data"}, {"1", "SVM / MNIST"}, {"2", "CNN"}});
  const SurveyTable s = split_column(t, 1, "/");
  REQUIRE(s.n_cols() == 3);
  CHECK(s.columns[1].label == "Method");
  CHECK(s.columns[2].label == "Data");
  CHECK(s.rows == std::vector<Row>{{"1", "SVM", "MNIST"}, {"2", "CNN", ""}});

  const SurveyTable m = merge_columns(s, {1, 2}, " / ", "Method/Data");
  CHECK(m.rows == std::vector<Row>{{"1", "SVM / MNIST"}, {"2", "CNN"}});
  CHECK(error_of([&] { merge_columns(s, {1}, "", "x"); }) == Errc::MergeShapeMismatch);
  CHECK(error_of([&] { merge_columns(s, {1, 1}, "", "x"); }) == Errc::MergeShapeMismatch);
  CHECK(error_of([&] { merge_columns(s, {1, 7}, "", "x"); }) == Errc::IndexOutOfRange);

  const SurveyTable odd = split_column(table({{"Reference", "Pair"}, {"1", "a;b;c"}}), 1, ";");
  CHECK(odd.columns[3].label == "Pair 3");
}

TEST_CASE("column and row edits leave inputs untouched") {
  const SurveyTable t = table({{"Key", "A"}, {"1", "x"}});
  const SurveyTable before = t;
  const SurveyTable r = set_reference_column(t, 0);
  CHECK(r.columns[0].role == Role::Reference);
  CHECK(t == before);
  CHECK(set_reference_column(r, 1).columns[0].role == Role::Data);
  CHECK(drop_column(t, 1).n_cols() == 1);
  CHECK(drop_row(t, 0).n_rows() == 0);
  CHECK(add_column(t, "B", Kind::Resource, 1).rows[0] == Row{"1", "", "x"});
  CHECK(error_of([&] { drop_column(t, 2); }) == Errc::IndexOutOfRange);
  CHECK(error_of([&] { expand_legend(t); }) == Errc::NoLegend);
}

TEST_CASE("expand_legend is whole-cell, case-sensitive and idempotent") {
  SurveyTable t = table({{"Reference", "Open"}, {"[1]", "\xE2\x9C\x93"}, {"[2]", "\xE2\x9C\x93 partly"}, {"[3]", "ACC"}});
  t = set_legend_entry(t, "\xE2\x9C\x93", "yes");
  t = set_legend_entry(t, "acc", "accuracy");
  const SurveyTable e = expand_legend(t);
  CHECK(e.rows[0][1] == "yes");
  CHECK(e.rows[1][1] == "\xE2\x9C\x93 partly");
  CHECK(e.rows[2][1] == "ACC");
  CHECK(expand_legend(e) == e);
}

TEST_CASE("csv file round trip with legend sidecar") {
  const auto dir = temp_dir("roundtrip");
  SurveyTable t = table({{"Reference", "[R] Method", "Note"}, {"[1]", "SVM", "a, \"quoted\" value"}});
  t = set_legend_entry(t, "n/a", "not available");
  write_csv(t, dir / "t.csv");
  const std::string raw = csv::read_file(dir / "t.csv");
  CHECK(raw.substr(0, raw.find('\n')) == "Reference,[R] Method,Note");
  CHECK(testing::oracle_read_csv(raw) ==
        std::vector<std::vector<std::string>>{{"Reference", "[R] Method", "Note"}, {"[1]", "SVM", "a, \"quoted\" value"}});
  CHECK(std::filesystem::exists(dir / "t.legend.csv"));
  CHECK(read_csv(dir / "t.csv") == t);

  t.legend.reset();
  write_csv(t, dir / "t.csv");
  CHECK(!std::filesystem::exists(dir / "t.legend.csv"));
  CHECK(read_csv(dir / "t.csv") == t);
  CHECK(error_of([&] { read_csv(dir / "missing.csv"); }) == Errc::IoError);
  csv::write_file(dir / "bad.csv", "a,\"b\n");
  CHECK(error_of([&] { read_csv(dir / "bad.csv"); }) == Errc::CsvParseError);
}

TEST_CASE("ingest normalizes to NFC") {
  const SurveyTable t = table({{"Reference", "Caf" "e\xCC\x81"}, {"1", "e\xCC\x81t\xC3\xA9"}});
  CHECK(t.columns[1].label == "Caf\xC3\xA9");
  CHECK(t.rows[0][1] == "\xC3\xA9t\xC3\xA9");
}

TEST_CASE("property: transpose involution and csv round trip on random tables") {
  std::mt19937 rng(20240601);
  const auto dir = temp_dir("property");
  for (int i = 0; i < 1000; ++i) {
    const SurveyTable t = testing::random_table(rng);
    CAPTURE(i);
    REQUIRE(transpose(transpose(t)) == t);
    write_csv(t, dir / "t.csv");
    REQUIRE(read_csv(dir / "t.csv") == t);
    const std::string data = to_csv(t);
    auto expected = std::vector<std::vector<std::string>>{render_headers(t.columns)};
    expected.insert(expected.end(), t.rows.begin(), t.rows.end());
    REQUIRE(testing::oracle_read_csv(data) == expected);
  }
}

TEST_CASE("property: validate is empty iff rules 3, 4 and 6 hold") {
  std::mt19937 rng(99);
  int clean = 0;
  for (int i = 0; i < 1000; ++i) {
    const SurveyTable t = testing::random_structural_table(rng);
    int refs = 0;
    std::size_t ref_col = 0;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (t.columns[c].role == Role::Reference) {
        ++refs;
        if (refs == 1) ref_col = c;
      }
    }
    bool rule4 = true, rule6 = true;
    for (const auto& row : t.rows) {
      if (refs >= 1 && oracle_trim(row[ref_col]).empty()) rule4 = false;
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.legend && t.columns[c].role == Role::Data && t.legend->count(oracle_trim(row[c]))) rule6 = false;
      }
    }
    const bool ok = refs == 1 && rule4 && rule6;
    clean += ok ? 1 : 0;
    CAPTURE(i);
    REQUIRE(validate(t).empty() == ok);
  }
  CHECK(clean > 50);
}

TEST_CASE("edit scripts") {
  const SurveyTable t = table({{"Ref", "Method"}, {"1", "svm"}, {"", "cont."}});
  const std::string script =
      "# repair\n"
      "rename_column Ref Reference\n"
      "set_reference_column 0\n"
      "set_kind Method resource\n"
      "legend svm \"Support Vector Machine\"\n"
      "expand_legend\n"
      "merge_rows 0 1\n"
      "add_column \"Open \\\"source\\\"\" literal\n"
      "set_cell 0 2 yes\n";
  const SurveyTable out = apply_edit_script(t, script);
  CHECK(out.columns[0].role == Role::Reference);
  CHECK(out.columns[1].kind == Kind::Resource);
  CHECK(out.columns[2].label == "Open \"source\"");
  CHECK(out.rows == std::vector<Row>{{"1", "Support Vector Machine cont.", "yes"}});
  CHECK(validate(out).empty());

  CHECK(error_of([&] { apply_edit_script(t, "frobnicate 1"); }) == Errc::EditScriptError);
  CHECK(error_of([&] { apply_edit_script(t, "drop_row \"1"); }) == Errc::EditScriptError);
  CHECK(error_of([&] { apply_edit_script(t, "drop_row one"); }) == Errc::EditScriptError);
  CHECK(error_of([&] { apply_edit_script(t, "drop_column"); }) == Errc::EditScriptError);
  try {
    apply_edit_script(t, "\ndrop_row 7");
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexOutOfRange);
    CHECK(std::string(e.what()).rfind("line 2:", 0) == 0);
  }
  for (const std::string tok : {"plain", "two words", "q\"uote", "back\\slash", "", "#hash", "line\nbreak"}) {
    const auto cmds = parse_edit_script("legend " + quote_token(tok) + " x");
    REQUIRE(cmds.size() == 1);
    CHECK(cmds[0].tokens[1] == tok);
  }
}
