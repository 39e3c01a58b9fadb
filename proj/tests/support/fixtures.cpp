#include "fixtures.hpp"

#include <algorithm>
#include <stdexcept>

#include "surveykg/text.hpp"

namespace surveykg::testing {

namespace {

constexpr double kAscent = 0.718;

std::vector<std::string> lines_of(const std::string& cell) { return text::split(cell, "\n"); }

}  // namespace

TextMatrix flatten_lines(const TextMatrix& cells) {
  TextMatrix out;
  for (const auto& row : cells) {
    std::vector<std::string> r;
    for (const auto& cell : row) {
      std::string joined;
      for (const auto& line : lines_of(cell)) {
        if (line.empty()) continue;
        if (!joined.empty()) joined += ' ';
        joined += line;
      }
      r.push_back(joined);
    }
    out.push_back(std::move(r));
  }
  return out;
}

DrawnTable draw_table(PdfWriter& pdf, const TableDraw& d, const TextMatrix& cells) {
  const std::size_t n_rows = cells.size();
  const std::size_t n_cols = d.widths.size();
  std::vector<double> heights;
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (cells[r].size() != n_cols) throw std::logic_error("fixture row width mismatch");
    double h = d.leading + 6;
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto key = std::make_pair(static_cast<int>(r), static_cast<int>(c));
      if (d.rotated.count(key)) {
        h = std::max(h, PdfWriter::text_width(cells[r][c], d.size) + 9);
      } else {
        h = std::max(h, static_cast<double>(lines_of(cells[r][c]).size()) * d.leading + 6);
      }
    }
    heights.push_back(h);
  }
  std::vector<double> xs{d.x0};
  for (double w : d.widths) xs.push_back(xs.back() + w);
  std::vector<double> ys{d.top};
  for (double h : heights) ys.push_back(ys.back() - h);

  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto key = std::make_pair(static_cast<int>(r), static_cast<int>(c));
      const double cx = xs[c];
      const double top = ys[r];
      const std::string& cell = cells[r][c];
      if (d.images.count(key)) {
        pdf.image(cx + d.pad, ys[r + 1] + 4, 8, 8);
        continue;
      }
      if (d.rotated.count(key)) {
        pdf.rotated_text(cx + d.pad + kAscent * d.size, ys[r + 1] + 3, cell, d.size);
        continue;
      }
      const FixtureFont font = d.font_for ? d.font_for(static_cast<int>(r), static_cast<int>(c)) : d.font;
      const auto lines = lines_of(cell);
      const double mid_x = cx + d.widths[c] / 2;
      if (d.nested.count(key)) {
        const double mid_y = (top + ys[r + 1]) / 2;
        pdf.line(cx + 3, mid_y, xs[c + 1] - 3, mid_y);
        pdf.line(mid_x, ys[r + 1] + 3, mid_x, top - 3);
      }
      for (std::size_t k = 0; k < lines.size(); ++k) {
        const double baseline = top - 3 - kAscent * d.size - static_cast<double>(k) * d.leading;
        std::vector<std::pair<double, std::string>> pieces;
        if (d.nested.count(key)) {
          const auto halves = text::split(lines[k], "|");
          pieces.emplace_back(cx + d.pad, halves.at(0));
          if (halves.size() > 1) pieces.emplace_back(mid_x + d.pad, halves[1]);
        } else {
          pieces.emplace_back(cx + d.pad, lines[k]);
        }
        for (const auto& [x, piece] : pieces) {
          if (piece.empty()) continue;
          if (!d.allow_overflow && PdfWriter::text_width(piece, d.size) > d.widths[c] - 2 * d.pad) {
            throw std::logic_error("fixture text overflows its cell: " + piece);
          }
          if (d.kerned) {
            pdf.kerned_text(x, baseline, piece, d.size);
          } else {
            pdf.text(x, baseline, piece, d.size, font);
          }
        }
      }
    }
  }

  DrawnTable out;
  const double x1 = xs.back();
  const double bottom = ys.back();
  switch (d.borders) {
    case Borders::None:
      break;
    case Borders::Grid:
      for (double y : ys) pdf.line(d.x0, y, x1, y);
      for (double x : xs) pdf.line(x, d.top, x, bottom);
      out.h = ys;
      out.v = xs;
      break;
    case Borders::PerCell:
      for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
          pdf.stroke_rect(xs[c], ys[r + 1], d.widths[c], ys[r] - ys[r + 1]);
        }
      }
      out.h = ys;
      out.v = xs;
      break;
    case Borders::Booktabs:
      pdf.fill_rect(d.x0, d.top - 0.4, x1 - d.x0, 0.8);
      pdf.fill_rect(d.x0, ys[1] - 0.25, x1 - d.x0, 0.5);
      pdf.fill_rect(d.x0, bottom - 0.4, x1 - d.x0, 0.8);
      out.h = {d.top, ys[1], bottom};
      break;
  }
  out.region = layout::Region{static_cast<std::size_t>(d.page), d.x0 - 2, bottom - 2, x1 + 2, d.top + 2};
  return out;
}

namespace {

TableFixture single(std::string name, std::string mode, PdfWriter& pdf, const TableDraw& draw, const TextMatrix& cells,
                    bool golden, std::vector<std::string> issues = {}) {
  const DrawnTable drawn = draw_table(pdf, draw, cells);
  TableFixture f;
  f.name = std::move(name);
  f.pdf = pdf.bytes();
  f.mode = std::move(mode);
  f.regions = {drawn.region};
  f.golden = golden;
  if (golden) f.expected = flatten_lines(cells);
  f.issues = std::move(issues);
  f.h_rulings = drawn.h;
  f.v_rulings = drawn.v;
  return f;
}

std::vector<TableFixture> build() {
  std::vector<TableFixture> out;

  {
    PdfWriter pdf;
    TableDraw d;
    d.x0 = 100;
    d.top = 250;
    d.widths = {150, 150};
    d.borders = Borders::PerCell;
    out.push_back(single("ruled_2x2", "lattice", pdf, d, {{"Reference", "Method"}, {"[1]", "SVM"}}, true));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 150, 170};
    out.push_back(single("ruled_multiline", "lattice", pdf, d,
                         {{"Reference", "Approach", "Evaluation"},
                          {"[1]", "Rule-based\nparsing", "Precision 0.91"},
                          {"[2]", "Neural sequence\nlabelling", "F1 0.88"},
                          {"[3]", "Hybrid", "Recall 0.79\non two corpora"}},
                         true));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {80, 140, 120, 100};
    auto f = single("dual_cue", "lattice", pdf, d,
                    {{"Reference", "Method", "Dataset", "Accuracy"},
                     {"[4]", "SVM", "MNIST", "0.95"},
                     {"[5]", "Random Forest", "CIFAR-10", "0.81"},
                     {"Smith 2019", "CNN", "ImageNet", "0.76"},
                     {"[7]", "Logistic Regression", "Iris", "0.97"}},
                    true);
    f.dual_cue = true;
    out.push_back(std::move(f));
  }
  {
    PdfWriter pdf;
    pdf.set_compress(true);
    TableDraw d;
    d.top = 600;
    d.widths = {90, 160, 110};
    d.kerned = true;
    d.borders = Borders::PerCell;
    auto f = single("dual_cue_compressed", "lattice", pdf, d,
                    {{"Key", "Tool", "Licence"},
                     {"[8]", "Tabula", "MIT"},
                     {"[9]", "Camelot", "MIT"},
                     {"[10]", "pdfplumber", "MIT"}},
                    true);
    f.dual_cue = true;
    out.push_back(std::move(f));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 150, 120, 80};
    d.borders = Borders::None;
    d.font = FixtureFont::HelveticaWide;
    out.push_back(single("borderless", "stream", pdf, d,
                         {{"Reference", "Technique", "Domain", "Year"},
                          {"[11]", "Crowdsourcing", "Biology", "2015"},
                          {"[12]", "Active learning", "Chemistry", "2017"},
                          {"[13]", "Distant supervision", "Physics", "2019"},
                          {"[14]", "Rule mining", "Medicine", "2020"}},
                         true));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {100, 170, 110};
    d.borders = Borders::Booktabs;
    out.push_back(single("booktabs", "stream", pdf, d,
                         {{"Reference", "System", "Storage"},
                          {"[15]", "ORKG", "Neo4j"},
                          {"[16]", "Wikidata", "Blazegraph"},
                          {"[17]", "DBpedia", "Virtuoso"},
                          {"[18]", "YAGO", "RDF files"},
                          {"[19]", "Freebase", "Graphd"}},
                         true));
  }
  {
    PdfWriter pdf;
    pdf.new_page();
    TableDraw d;
    d.top = 300;
    d.widths = {90, 150, 150};
    const TextMatrix part1 = {{"Reference", "Ontology", "Format"},
                              {"[20]", "FOAF", "RDF/XML"},
                              {"[21]", "SKOS", "Turtle"},
                              {"[22]", "Dublin Core", "N-Triples"},
                              {"[23]", "PROV-O", "JSON-LD"}};
    const TextMatrix part2 = {{"Reference", "Ontology", "Format"},
                              {"[24]", "SIOC", "RDFa"},
                              {"[25]", "DOAP", "RDF/XML"},
                              {"[26]", "Schema.org", "Microdata"}};
    const DrawnTable a = draw_table(pdf, d, part1);
    pdf.new_page();
    d.page = 1;
    d.top = 740;
    const DrawnTable b = draw_table(pdf, d, part2);
    TableFixture f;
    f.name = "multipage_ruled";
    f.pdf = pdf.bytes();
    f.mode = "lattice";
    f.regions = {a.region, b.region};
    f.golden = true;
    f.expected = part1;
    f.expected.insert(f.expected.end(), part2.begin() + 1, part2.end());
    f.h_rulings = a.h;
    f.v_rulings = a.v;
    out.push_back(std::move(f));
  }
  {
    PdfWriter pdf;
    pdf.new_page();
    TableDraw d;
    d.top = 200;
    d.widths = {90, 170, 90};
    d.borders = Borders::None;
    const TextMatrix part1 = {{"Reference", "Benchmark", "Size"},
                              {"[27]", "SQuAD", "100k"},
                              {"[28]", "GLUE", "9 tasks"},
                              {"[29]", "SuperGLUE", "8 tasks"}};
    const TextMatrix part2 = {{"[30]", "MS MARCO", "1M"},
                              {"[31]", "Natural Questions", "307k"},
                              {"[32]", "TriviaQA", "95k"}};
    const DrawnTable a = draw_table(pdf, d, part1);
    pdf.new_page();
    d.page = 1;
    d.top = 740;
    const DrawnTable b = draw_table(pdf, d, part2);
    TableFixture f;
    f.name = "multipage_borderless";
    f.pdf = pdf.bytes();
    f.mode = "stream";
    f.regions = {a.region, b.region};
    f.golden = true;
    f.expected = part1;
    f.expected.insert(f.expected.end(), part2.begin(), part2.end());
    out.push_back(std::move(f));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 120, 220};
    d.borders = Borders::None;
    auto f = single("wrapped_row", "stream", pdf, d,
                    {{"Reference", "Method", "Description"},
                     {"[33]", "Tabula", "Stream and lattice\nextraction of PDF tables"},
                     {"[34]", "Camelot", "Configurable extraction"},
                     {"[35]", "Grobid", "Header and reference\nparsing with CRF"},
                     {"[36]", "Cermine", "Metadata extraction"}},
                    false, {"RowSplitError"});
    // Stream reproduces the wrapped-row defect: continuation lines become rows.
    f.golden = true;
    f.expected = {{"Reference", "Method", "Description"},
                  {"[33]", "Tabula", "Stream and lattice"},
                  {"", "", "extraction of PDF tables"},
                  {"[34]", "Camelot", "Configurable extraction"},
                  {"[35]", "Grobid", "Header and reference"},
                  {"", "", "parsing with CRF"},
                  {"[36]", "Cermine", "Metadata extraction"}};
    out.push_back(std::move(f));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.size = 8;
    d.leading = 10;
    d.widths = {70, 120, 90};
    d.borders = Borders::None;
    out.push_back(single("small_font", "stream", pdf, d,
                         {{"Reference", "Model", "Params"},
                          {"[37]", "BERT-base", "110M"},
                          {"[38]", "GPT-2", "1.5B"},
                          {"[39]", "T5-small", "60M"}},
                         true));
  }
  {
    PdfWriter pdf;
    pdf.new_page(792, 612);
    TableDraw d;
    d.x0 = 50;
    d.top = 500;
    d.widths = {80, 90, 90, 90, 90, 90, 90};
    out.push_back(single("ruled_wide", "lattice", pdf, d,
                         {{"Reference", "P1", "P2", "P3", "P4", "P5", "P6"},
                          {"[40]", "yes", "no", "yes", "no", "yes", "no"},
                          {"[41]", "no", "no", "yes", "yes", "no", "yes"}},
                         true));
  }

  // Defect fixtures, one per issue kind.
  {
    PdfWriter pdf;
    TableDraw d;
    d.borders = Borders::None;
    d.allow_overflow = true;
    const std::string bridge = "Smith and Jones (2010)";
    d.widths = {PdfWriter::text_width(bridge, d.size) + 2, 150};
    out.push_back(single("column_split", "stream", pdf, d,
                         {{"Reference", "Method"}, {"[42]", "SVM"}, {bridge, "Bayes"}, {"[43]", "kNN"}}, false,
                         {"ColumnSplitError"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 120, 100};
    out.push_back(single("empty_column", "lattice", pdf, d,
                         {{"Reference", "Method", "Notes"}, {"[44]", "CRF", ""}, {"[45]", "LSTM", ""},
                          {"[46]", "BiLSTM", ""}},
                         false, {"EmptyColumn"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 140};
    d.font_for = [](int r, int c) { return r == 1 && c == 1 ? FixtureFont::Corrupt : FixtureFont::Helvetica; };
    out.push_back(single("text_corruption", "lattice", pdf, d,
                         {{"Reference", "Title"}, {"[47]", "Xylography"}, {"[48]", "Lithography"}}, false,
                         {"TextCorruption"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 100, 80};
    out.push_back(single("header_issue", "lattice", pdf, d,
                         {{"Reference", "", "Year"}, {"[49]", "CRF", "2001"}, {"[50]", "HMM", "1989"}}, false,
                         {"HeaderIssue"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 100, 40};
    d.rotated = {{0, 2}};
    out.push_back(single("vertical_text", "lattice", pdf, d,
                         {{"Reference", "Model", "Accuracy"}, {"[51]", "CNN", "0.91"}, {"[52]", "RNN", "0.87"}},
                         false, {"VerticalText"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 100, 90};
    d.images = {{1, 2}, {3, 2}};
    out.push_back(single("unsupported_cell", "lattice", pdf, d,
                         {{"Reference", "Model", "Open source"}, {"[53]", "CNN", ""}, {"[54]", "RNN", "no"},
                          {"[55]", "GAN", ""}},
                         false, {"UnsupportedCellValue"}));
  }
  {
    PdfWriter pdf;
    TableDraw d;
    d.widths = {90, 100, 100};
    d.nested = {{1, 2}};
    out.push_back(single("nested_table", "lattice", pdf, d,
                         {{"Reference", "Model", "Scores"}, {"[56]", "CNN", "P|R\n0.9|0.8"}, {"[57]", "RNN", "0.7"}},
                         false, {"NestedTable"}));
  }
  return out;
}

}  // namespace

const std::vector<TableFixture>& table_fixtures() {
  static const std::vector<TableFixture> all = build();
  return all;
}

const TableFixture& table_fixture(std::string_view name) {
  for (const auto& f : table_fixtures()) {
    if (f.name == name) return f;
  }
  throw std::out_of_range("unknown fixture " + std::string(name));
}

}  // namespace surveykg::testing
