#include "surveykg/layout/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "content.hpp"
#include "pdf_object.hpp"
#include "surveykg/error.hpp"
#include "surveykg/text.hpp"

namespace surveykg::layout {

namespace {

bool is_blank(const std::string& s) {
  for (char32_t cp : text::to_utf32(s)) {
    if (cp != U' ' && cp != U'\t' && cp != U'\n' && cp != U'\r' && cp != 0xA0 && cp != 0x2002 && cp != 0x2003 &&
        cp != 0x2009 && cp != 0x200B && cp != 0) {
      return false;
    }
  }
  return true;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct PageInfo {
  pdf::Object dict;
  pdf::Object resources;
  Rect box;
};

std::array<double, 4> read_box(const pdf::File& file, const pdf::Object& o) {
  const pdf::Object r = file.resolve(o);
  if (!r.is_array() || r.array().size() != 4) return {0, 0, 0, 0};
  std::array<double, 4> b{};
  for (std::size_t i = 0; i < 4; ++i) b[i] = file.resolve(r.array()[i]).number();
  return {std::min(b[0], b[2]), std::min(b[1], b[3]), std::max(b[0], b[2]), std::max(b[1], b[3])};
}

void collect_pages(const pdf::File& file, const pdf::Object& node_ref, pdf::Object resources,
                   std::array<double, 4> media, std::array<double, 4> crop, bool has_crop,
                   std::set<int>& visited, std::vector<PageInfo>& out) {
  if (node_ref.is_ref() && !visited.insert(node_ref.ref().num).second) return;
  const pdf::Object node = file.resolve(node_ref);
  if (!node.is_dict()) return;
  const pdf::Dict& d = node.dict();
  if (d.find("Resources")) resources = d.get("Resources");
  if (d.find("MediaBox")) media = read_box(file, d.get("MediaBox"));
  if (d.find("CropBox")) {
    crop = read_box(file, d.get("CropBox"));
    has_crop = true;
  }
  const pdf::Object kids = file.get_resolved(d, "Kids");
  const bool is_pages = d.get("Type").is_name("Pages") || (kids.is_array() && !d.get("Type").is_name("Page"));
  if (is_pages) {
    if (!kids.is_array()) return;
    for (const auto& kid : kids.array()) collect_pages(file, kid, resources, media, crop, has_crop, visited, out);
    return;
  }
  std::array<double, 4> box = media;
  if (box[2] - box[0] <= 0 || box[3] - box[1] <= 0) box = {0, 0, 612, 792};
  if (has_crop) {
    std::array<double, 4> c{std::max(box[0], crop[0]), std::max(box[1], crop[1]), std::min(box[2], crop[2]),
                            std::min(box[3], crop[3])};
    if (c[2] - c[0] > 0 && c[3] - c[1] > 0) box = c;
  }
  out.push_back(PageInfo{node, resources, Rect{box[0], box[1], box[2], box[3]}});
}

Page build_page(const pdf::File& file, const PageInfo& info, std::size_t index) {
  Page page;
  page.index = index;
  page.width = info.box.width();
  page.height = info.box.height();
  const auto base = pdf::Matrix::translate(-info.box.x0, -info.box.y0);
  const pdf::PageContent content = pdf::interpret_page(file, info.dict.dict().get("Contents"), info.resources, base);

  for (const auto& rg : content.glyphs) {
    if (is_blank(rg.text)) continue;
    PositionedGlyph g;
    g.text = rg.text;
    g.x0 = clamp(rg.box.x0, 0, page.width);
    g.x1 = clamp(rg.box.x1, 0, page.width);
    g.y0 = clamp(rg.box.y0, 0, page.height);
    g.y1 = clamp(rg.box.y1, 0, page.height);
    g.baseline = clamp(rg.baseline, 0, page.height);
    g.font_size = rg.font_size;
    g.upright = rg.upright;
    page.glyphs.push_back(std::move(g));
  }
  sort_reading_order(page.glyphs);

  std::vector<Ruling> raw;
  for (const auto& s : content.segments) {
    const double dx = std::abs(s.x1 - s.x0), dy = std::abs(s.y1 - s.y0);
    Ruling r;
    r.thickness = s.width;
    if (dx < kRulingAxisTolerance && dy < kRulingAxisTolerance) continue;
    if (dx < kRulingAxisTolerance) {
      r.orientation = Orientation::Vertical;
      r.position = (s.x0 + s.x1) / 2;
      r.start = std::min(s.y0, s.y1);
      r.end = std::max(s.y0, s.y1);
      if (r.position < 0 || r.position > page.width) continue;
      r.start = clamp(r.start, 0, page.height);
      r.end = clamp(r.end, 0, page.height);
    } else if (dy < kRulingAxisTolerance) {
      r.orientation = Orientation::Horizontal;
      r.position = (s.y0 + s.y1) / 2;
      r.start = std::min(s.x0, s.x1);
      r.end = std::max(s.x0, s.x1);
      if (r.position < 0 || r.position > page.height) continue;
      r.start = clamp(r.start, 0, page.width);
      r.end = clamp(r.end, 0, page.width);
    } else {
      continue;
    }
    raw.push_back(r);
  }
  page.rulings = merge_rulings(std::move(raw));

  for (const auto& img : content.images) {
    Rect r{clamp(img.x0, 0, page.width), clamp(img.y0, 0, page.height), clamp(img.x1, 0, page.width),
           clamp(img.y1, 0, page.height)};
    if (r.width() > 0 && r.height() > 0) page.images.push_back(r);
  }
  return page;
}

void check_region(const Document& doc, const Region& region) {
  if (region.page_index >= doc.pages.size()) {
    throw Error(Errc::PageOutOfRange, "page " + std::to_string(region.page_index) + " of " +
                                          std::to_string(doc.pages.size()));
  }
  if (!(region.x0 < region.x1) || !(region.y0 < region.y1)) {
    throw Error(Errc::InvalidRegion, "empty region rectangle");
  }
}

}  // namespace

Document load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileUnreadable, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::FileUnreadable, "read failed for " + path.string());
  return load_document_from_memory(ss.str(), path.string());
}

Document load_document_from_memory(std::string bytes, std::string source_name) {
  pdf::File file(std::move(bytes));
  if (file.trailer().find("Encrypt") && !file.trailer().get("Encrypt").is_null()) {
    throw Error(Errc::EncryptedPdf, source_name + " is encrypted; unlock it before import");
  }
  const pdf::Object catalog = file.get_resolved(file.trailer(), "Root");
  if (!catalog.is_dict()) throw Error(Errc::MalformedPdf, "document catalog is not a dictionary");

  std::vector<PageInfo> infos;
  std::set<int> visited;
  collect_pages(file, catalog.dict().get("Pages"), pdf::Object{}, {0, 0, 612, 792}, {}, false, visited, infos);
  if (infos.empty()) throw Error(Errc::MalformedPdf, "document has no pages");

  Document doc;
  doc.source_path = std::move(source_name);
  bool any_text = false, any_image = false;
  for (std::size_t i = 0; i < infos.size(); ++i) {
    doc.pages.push_back(build_page(file, infos[i], i));
    any_text = any_text || !doc.pages.back().glyphs.empty();
    any_image = any_image || !doc.pages.back().images.empty();
  }
  if (!any_text && any_image) {
    throw Error(Errc::NoTextLayer, doc.source_path + " has images but no text layer (scanned document)");
  }
  return doc;
}

const Page& page_for(const Document& doc, const Region& region) {
  check_region(doc, region);
  return doc.pages[region.page_index];
}

std::vector<PositionedGlyph> glyphs_in_rect(const Page& page, const Rect& rect) {
  std::vector<PositionedGlyph> out;
  for (const auto& g : page.glyphs) {
    if (rect.contains(g.center_x(), g.center_y())) out.push_back(g);
  }
  return out;
}

std::vector<Ruling> rulings_in_rect(const Page& page, const Rect& rect) {
  std::vector<Ruling> out;
  for (auto r : page.rulings) {
    const bool h = r.horizontal();
    const double lo = h ? rect.y0 : rect.x0, hi = h ? rect.y1 : rect.x1;
    if (r.position < lo || r.position > hi) continue;
    r.start = std::max(r.start, h ? rect.x0 : rect.y0);
    r.end = std::min(r.end, h ? rect.x1 : rect.y1);
    if (r.end - r.start < kMinRulingLength) continue;
    out.push_back(r);
  }
  return out;
}

std::vector<Rect> images_in_rect(const Page& page, const Rect& rect) {
  std::vector<Rect> out;
  for (const auto& img : page.images) {
    if (rect.contains(img.center_x(), img.center_y())) out.push_back(img);
  }
  return out;
}

std::vector<PositionedGlyph> glyphs_in_region(const Document& doc, const Region& region) {
  return glyphs_in_rect(page_for(doc, region), region.rect());
}

std::vector<Ruling> rulings_in_region(const Document& doc, const Region& region) {
  return rulings_in_rect(page_for(doc, region), region.rect());
}

std::vector<Ruling> merge_rulings(std::vector<Ruling> rulings) {
  std::vector<Ruling> out;
  for (auto orientation : {Orientation::Horizontal, Orientation::Vertical}) {
    std::vector<Ruling> group;
    for (const auto& r : rulings) {
      if (r.orientation == orientation && r.end > r.start) group.push_back(r);
    }
    std::sort(group.begin(), group.end(), [](const Ruling& a, const Ruling& b) {
      if (a.position != b.position) return a.position < b.position;
      return a.start < b.start;
    });
    // clusters of near-equal positions (single linkage)
    std::size_t i = 0;
    while (i < group.size()) {
      std::size_t j = i + 1;
      while (j < group.size() && group[j].position - group[j - 1].position <= kRulingMergeDistance) ++j;
      std::vector<Ruling> cluster(group.begin() + static_cast<std::ptrdiff_t>(i),
                                  group.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(cluster.begin(), cluster.end(), [](const Ruling& a, const Ruling& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.end < b.end;
      });
      std::vector<std::vector<Ruling>> runs;
      for (const auto& r : cluster) {
        if (!runs.empty()) {
          double run_end = 0;
          for (const auto& m : runs.back()) run_end = std::max(run_end, m.end);
          if (r.start <= run_end + kRulingMergeDistance) {
            runs.back().push_back(r);
            continue;
          }
        }
        runs.push_back({r});
      }
      for (const auto& run : runs) {
        Ruling merged = run.front();
        double pos_sum = 0;
        for (const auto& m : run) {
          pos_sum += m.position;
          merged.start = std::min(merged.start, m.start);
          merged.end = std::max(merged.end, m.end);
          merged.thickness = std::max(merged.thickness, m.thickness);
        }
        merged.position = pos_sum / static_cast<double>(run.size());
        if (merged.length() >= kMinRulingLength) out.push_back(merged);
      }
      i = j;
    }
  }
  return out;
}

void sort_reading_order(std::vector<PositionedGlyph>& glyphs) {
  std::vector<std::size_t> idx(glyphs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (glyphs[a].baseline != glyphs[b].baseline) return glyphs[a].baseline > glyphs[b].baseline;
    return glyphs[a].x0 < glyphs[b].x0;
  });
  std::vector<PositionedGlyph> out;
  out.reserve(glyphs.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    const double anchor = glyphs[idx[i]].baseline;
    std::size_t j = i + 1;
    while (j < idx.size() && anchor - glyphs[idx[j]].baseline <= kReadingOrderTolerance) ++j;
    std::vector<std::size_t> line(idx.begin() + static_cast<std::ptrdiff_t>(i), idx.begin() + static_cast<std::ptrdiff_t>(j));
    std::stable_sort(line.begin(), line.end(), [&](std::size_t a, std::size_t b) { return glyphs[a].x0 < glyphs[b].x0; });
    for (auto k : line) out.push_back(glyphs[k]);
    i = j;
  }
  glyphs = std::move(out);
}

std::vector<TextLine> group_lines(std::vector<PositionedGlyph> glyphs, double tolerance) {
  std::stable_sort(glyphs.begin(), glyphs.end(), [](const PositionedGlyph& a, const PositionedGlyph& b) {
    if (a.baseline != b.baseline) return a.baseline > b.baseline;
    return a.x0 < b.x0;
  });
  std::vector<TextLine> lines;
  std::size_t i = 0;
  while (i < glyphs.size()) {
    const double anchor = glyphs[i].baseline;
    std::size_t j = i + 1;
    while (j < glyphs.size() && anchor - glyphs[j].baseline <= tolerance) ++j;
    TextLine line;
    line.glyphs.assign(glyphs.begin() + static_cast<std::ptrdiff_t>(i), glyphs.begin() + static_cast<std::ptrdiff_t>(j));
    std::stable_sort(line.glyphs.begin(), line.glyphs.end(),
                     [](const PositionedGlyph& a, const PositionedGlyph& b) { return a.x0 < b.x0; });
    line.baseline = anchor;
    line.box = {line.glyphs.front().x0, line.glyphs.front().y0, line.glyphs.front().x1, line.glyphs.front().y1};
    for (const auto& g : line.glyphs) {
      line.box.x0 = std::min(line.box.x0, g.x0);
      line.box.y0 = std::min(line.box.y0, g.y0);
      line.box.x1 = std::max(line.box.x1, g.x1);
      line.box.y1 = std::max(line.box.y1, g.y1);
    }
    line.text = join_line(line.glyphs);
    lines.push_back(std::move(line));
    i = j;
  }
  return lines;
}

std::vector<std::vector<PositionedGlyph>> split_words(const std::vector<PositionedGlyph>& line) {
  std::vector<std::vector<PositionedGlyph>> words;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (i == 0 || line[i].x0 - line[i - 1].x1 > kWordGapFactor * line[i - 1].font_size) words.emplace_back();
    words.back().push_back(line[i]);
  }
  return words;
}

std::string join_line(const std::vector<PositionedGlyph>& line) {
  std::string out;
  for (const auto& word : split_words(line)) {
    if (!out.empty()) out.push_back(' ');
    for (const auto& g : word) out += g.text;
  }
  return out;
}

std::string dump_layout(const Document& doc) {
  std::string out;
  char buf[256];
  for (const auto& page : doc.pages) {
    for (const auto& g : page.glyphs) {
      std::snprintf(buf, sizeof(buf), "GLYPH %zu %.2f %.2f %.2f %.2f ", page.index, g.x0, g.y0, g.x1, g.y1);
      out += buf;
      out += g.text;
      out += '\n';
    }
    for (const auto& r : page.rulings) {
      std::snprintf(buf, sizeof(buf), "RULE %zu %c %.2f %.2f %.2f\n", page.index, r.horizontal() ? 'H' : 'V',
                    r.position, r.start, r.end);
      out += buf;
    }
    for (const auto& img : page.images) {
      std::snprintf(buf, sizeof(buf), "IMAGE %zu %.2f %.2f %.2f %.2f\n", page.index, img.x0, img.y0, img.x1, img.y1);
      out += buf;
    }
  }
  return out;
}

Region parse_region(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidRegion, "expected page:x0,y0,x1,y1, got '" + spec + "'");
  Region r;
  try {
    std::size_t used = 0;
    const long page = std::stol(spec.substr(0, colon), &used);
    if (used != colon || page < 0) throw std::invalid_argument("page");
    r.page_index = static_cast<std::size_t>(page);
    const auto parts = text::split(spec.substr(colon + 1), ",");
    if (parts.size() != 4) throw std::invalid_argument("coords");
    double v[4];
    for (std::size_t i = 0; i < 4; ++i) {
      v[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("coord");
    }
    r.x0 = v[0];
    r.y0 = v[1];
    r.x1 = v[2];
    r.y1 = v[3];
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidRegion, "expected page:x0,y0,x1,y1, got '" + spec + "'");
  }
  if (!(r.x0 < r.x1) || !(r.y0 < r.y1)) throw Error(Errc::InvalidRegion, "empty region rectangle '" + spec + "'");
  return r;
}

std::string format_region(const Region& region) {
  std::ostringstream ss;
  ss << region.page_index << ':' << region.x0 << ',' << region.y0 << ',' << region.x1 << ',' << region.y1;
  return ss.str();
}

}  // namespace surveykg::layout
