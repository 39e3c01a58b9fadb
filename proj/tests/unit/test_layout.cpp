#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "surveykg/error.hpp"
#include "surveykg/layout/layout.hpp"

using namespace surveykg;
using namespace surveykg::layout;
using testing::PdfWriter;

namespace {

Document load(const std::string& bytes) { return load_document_from_memory(bytes, "mem.pdf"); }

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::UsageError;
}

std::string concat(const std::vector<PositionedGlyph>& glyphs) {
  std::string s;
  for (const auto& g : glyphs) s += g.text;
  return s;
}

}  // namespace

TEST_CASE("ruled_2x2 exposes its glyphs and six rulings") {
  const auto& fx = testing::table_fixture("ruled_2x2");
  const Document doc = load(fx.pdf);
  REQUIRE(doc.page_count() == 1);
  const Page& page = doc.pages[0];
  CHECK(page.width == 612);
  CHECK(page.height == 792);
  CHECK(concat(page.glyphs) == "ReferenceMethod[1]SVM");

  REQUIRE(page.rulings.size() == 6);
  std::vector<double> h, v;
  for (const auto& r : page.rulings) (r.horizontal() ? h : v).push_back(r.position);
  std::sort(h.rbegin(), h.rend());
  std::sort(v.begin(), v.end());
  REQUIRE(h.size() == fx.h_rulings.size());
  REQUIRE(v.size() == fx.v_rulings.size());
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(fx.h_rulings[i]).epsilon(1e-6));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(fx.v_rulings[i]).epsilon(1e-6));
  for (const auto& r : page.rulings) {
    CHECK(r.length() == doctest::Approx(r.horizontal() ? 300.0 : 36.0));
  }
}

TEST_CASE("glyph geometry follows the text matrix") {
  const Document doc = load(testing::table_fixture("ruled_2x2").pdf);
  const PositionedGlyph& r = doc.pages[0].glyphs.front();
  CHECK(r.text == "R");
  CHECK(r.x0 == doctest::Approx(104));
  CHECK(r.x1 == doctest::Approx(104 + 7.22));
  CHECK(r.baseline == doctest::Approx(250 - 3 - 7.18));
  CHECK(r.font_size == doctest::Approx(10));
  CHECK(r.upright);
}

TEST_CASE("word groups and region queries") {
  const Document doc = load(testing::table_fixture("ruled_2x2").pdf);
  const Region whole{0, 72, 72, 540, 300};
  std::vector<std::string> words;
  for (const auto& line : group_lines(glyphs_in_region(doc, whole), kReadingOrderTolerance)) {
    for (const auto& w : split_words(line.glyphs)) words.push_back(concat(w));
  }
  CHECK(words == std::vector<std::string>{"Reference", "Method", "[1]", "SVM"});
  CHECK(rulings_in_region(doc, whole).size() == 6);

  const Region left{0, 0, 0, 250, 792};
  CHECK(concat(glyphs_in_region(doc, left)) == "Reference[1]");
  CHECK(rulings_in_region(doc, Region{0, 0, 0, 120, 792}).size() == 4);  // 3 clipped H + 1 V

  CHECK(error_of([&] { glyphs_in_region(doc, Region{3, 0, 0, 10, 10}); }) == Errc::PageOutOfRange);
  CHECK(error_of([&] { glyphs_in_region(doc, Region{0, 10, 0, 10, 10}); }) == Errc::InvalidRegion);
}

TEST_CASE("blank page loads with no glyphs") {
  PdfWriter pdf;
  pdf.new_page();
  const Document doc = load(pdf.bytes());
  CHECK(doc.page_count() == 1);
  CHECK(doc.pages[0].glyphs.empty());
  CHECK(doc.pages[0].rulings.empty());
}

TEST_CASE("load failures map to error codes") {
  PdfWriter scan;
  scan.image(50, 50, 500, 700);
  CHECK(error_of([&] { load(scan.bytes()); }) == Errc::NoTextLayer);

  PdfWriter locked;
  locked.text(72, 700, "secret");
  locked.set_encrypted_marker(true);
  CHECK(error_of([&] { load(locked.bytes()); }) == Errc::EncryptedPdf);

  CHECK(error_of([] { load("hello, this is not a pdf"); }) == Errc::NotAPdf);
  CHECK(error_of([] { load_document("/nonexistent/file.pdf"); }) == Errc::FileUnreadable);
}

TEST_CASE("damaged cross-reference data is rebuilt by scanning") {
  PdfWriter pdf;
  pdf.text(72, 700, "Recovered");
  std::string bytes = pdf.bytes();
  const auto pos = bytes.rfind("startxref\n");
  REQUIRE(pos != std::string::npos);
  bytes = bytes.substr(0, pos) + "startxref\n99999\n%%EOF\n";
  const Document doc = load(bytes);
  CHECK(concat(doc.pages[0].glyphs) == "Recovered");
}

TEST_CASE("compressed streams, TJ arrays and hex strings decode") {
  const Document doc = load(testing::table_fixture("dual_cue_compressed").pdf);
  std::vector<std::string> lines;
  for (const auto& l : group_lines(doc.pages[0].glyphs, kReadingOrderTolerance)) lines.push_back(l.text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "Key Tool Licence");
  CHECK(lines[3] == "[10] pdfplumber MIT");
}

TEST_CASE("explicit widths and built-in metrics agree") {
  PdfWriter a, b;
  a.text(72, 700, "Distant supervision", 10, testing::FixtureFont::Helvetica);
  b.text(72, 700, "Distant supervision", 10, testing::FixtureFont::HelveticaWide);
  const auto ga = load(a.bytes()).pages[0].glyphs;
  const auto gb = load(b.bytes()).pages[0].glyphs;
  REQUIRE(ga.size() == gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(ga[i].x1 == doctest::Approx(gb[i].x1));
  CHECK(ga.back().x1 == doctest::Approx(72 + PdfWriter::text_width("Distant supervision", 10)));
}

TEST_CASE("rotated glyphs are flagged and unmapped codes decode to U+FFFD") {
  PdfWriter pdf;
  pdf.rotated_text(100, 100, "Up");
  pdf.text(200, 700, "Xa", 10, testing::FixtureFont::Corrupt);
  const Document doc = load(pdf.bytes());
  int rotated = 0;
  std::string corrupt;
  for (const auto& g : doc.pages[0].glyphs) {
    if (!g.upright) ++rotated;
    if (g.baseline > 600) corrupt += g.text;
  }
  CHECK(rotated == 2);
  CHECK(corrupt == "\xEF\xBF\xBD" "a");
}

TEST_CASE("merge_rulings joins collinear pieces and keeps parallels apart") {
  std::vector<Ruling> in = {
      {Orientation::Horizontal, 100.0, 0, 50, 1},
      {Orientation::Horizontal, 100.4, 50.5, 120, 1},
      {Orientation::Horizontal, 103.0, 0, 120, 1},
      {Orientation::Horizontal, 200.0, 0, 3, 1},
      {Orientation::Vertical, 10.0, 0, 100, 1},
  };
  const auto out = merge_rulings(in);
  REQUIRE(out.size() == 3);
  CHECK(out[0].position == doctest::Approx(100.2));
  CHECK(out[0].start == 0);
  CHECK(out[0].end == 120);
  CHECK(out[1].position == 103);
  CHECK(!out[2].horizontal());
}

TEST_CASE("reading order groups baselines within tolerance") {
  std::vector<PositionedGlyph> g = {
      {"b", 20, 0, 25, 10, 10, 100.5, true},
      {"c", 5, 0, 10, 10, 10, 90, true},
      {"a", 10, 0, 15, 10, 10, 100, true},
  };
  sort_reading_order(g);
  CHECK(concat(g) == "abc");
}

TEST_CASE("join_line inserts spaces above the word gap") {
  std::vector<PositionedGlyph> g = {
      {"a", 0, 0, 5, 10, 10, 0, true},
      {"b", 6, 0, 11, 10, 10, 0, true},   // gap 1 <= 2.5
      {"c", 14, 0, 19, 10, 10, 0, true},  // gap 3 > 2.5
  };
  CHECK(join_line(g) == "ab c");
  CHECK(split_words(g).size() == 2);
}

TEST_CASE("region syntax") {
  const Region r = parse_region("0:72,72,540,300");
  CHECK(r == Region{0, 72, 72, 540, 300});
  CHECK(parse_region(format_region(r)) == r);
  CHECK(parse_region("2:1.5,2,3.25,4") == Region{2, 1.5, 2, 3.25, 4});
  for (const char* bad : {"", "0:1,2,3", "x:1,2,3,4", "0:5,5,1,1", "0:1,2,3,4,5", "-1:1,2,3,4"}) {
    CAPTURE(bad);
    CHECK(error_of([&] { parse_region(bad); }) == Errc::InvalidRegion);
  }
}

TEST_CASE("layout dump lists glyphs and rulings") {
  const std::string dump = dump_layout(load(testing::table_fixture("ruled_2x2").pdf));
  CHECK(dump.find("GLYPH 0 104.00") != std::string::npos);
  CHECK(dump.find("RULE 0 H 250.00 100.00 400.00") != std::string::npos);
  CHECK(dump.find("RULE 0 V 100.00 214.00 250.00") != std::string::npos);
}

TEST_CASE("landscape media box") {
  const Document doc = load(testing::table_fixture("ruled_wide").pdf);
  CHECK(doc.pages[0].width == 792);
  CHECK(doc.pages[0].height == 612);
}
