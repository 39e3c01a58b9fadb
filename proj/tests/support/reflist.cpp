#include "reflist.hpp"

#include "pdf_writer.hpp"
#include "surveykg/text.hpp"

namespace surveykg::testing {

namespace {

std::vector<std::string> wrap(const std::string& s, double width, double size) {
  std::vector<std::string> lines;
  std::string cur;
  for (const auto& word : text::split(s, " ")) {
    const std::string next = cur.empty() ? word : cur + " " + word;
    if (!cur.empty() && PdfWriter::text_width(next, size) > width) {
      lines.push_back(cur);
      cur = word;
    } else {
      cur = next;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

std::string reference_list_pdf(const RefListDraw& d, const std::vector<std::string>& entries) {
  PdfWriter pdf;
  pdf.new_page();
  double y = 740;
  auto advance = [&](double dy) {
    y -= dy;
    if (y < 60) {
      pdf.new_page();
      y = 740;
    }
  };
  pdf.text(d.x0, y, "Tables in Survey Articles", 14);
  advance(24);
  const std::vector<std::string> body = {
      "Survey articles compare many approaches in tables. We collect these",
      "comparisons and link every row to the paper it describes."};
  for (const auto& l : body) {
    pdf.text(d.x0, y, l, 10);
    advance(13);
  }
  if (d.earlier_heading) {
    advance(6);
    pdf.text(d.x0, y, "References", 12);
    advance(16);
    pdf.text(d.x0, y, "Citation styles vary between venues and are handled below.", 10);
    advance(13);
  }
  advance(10);
  if (!d.heading.empty()) {
    pdf.text(d.x0, y, d.heading, 12);
    advance(18);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string marker;
    double indent = 0;
    switch (d.marker) {
      case RefMarker::Bracket:
        marker = "[" + std::to_string(i + 1) + "]";
        indent = 22;
        break;
      case RefMarker::Dotted:
        marker = std::to_string(i + 1) + ".";
        indent = 18;
        break;
      case RefMarker::Hanging:
        indent = 12;
        break;
    }
    const double first_x = d.marker == RefMarker::Hanging ? d.x0 : d.x0 + indent;
    const auto lines = wrap(entries[i], d.width - indent, d.size);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (k == 0 && !marker.empty()) pdf.text(d.x0, y, marker, d.size);
      pdf.text(k == 0 ? first_x : d.x0 + indent, y, lines[k], d.size);
      advance(d.leading);
    }
    advance(2);
  }
  return pdf.bytes();
}

}  // namespace surveykg::testing
