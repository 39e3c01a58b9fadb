#include "content.hpp"

#include <cmath>
#include <map>
#include <memory>

#include "font.hpp"

namespace surveykg::pdf {

namespace {

// A filled rectangle no thicker than this is drawn line art (booktabs rules,
// cell borders) rather than a shaded area.
constexpr double kMaxFilledRuleThickness = 2.0;
constexpr int kMaxFormDepth = 12;

struct TextState {
  const Font* font = nullptr;
  double size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double horizontal_scale = 1;
  double leading = 0;
  double rise = 0;
};

struct GraphicsState {
  Matrix ctm;
  double line_width = 1;
  TextState text;
};

struct Point {
  double x = 0, y = 0;
};

struct Subpath {
  std::vector<Point> points;
  bool closed = false;
};

class Interpreter {
 public:
  Interpreter(const File& file, PageContent& out) : file_(file), out_(out) {}

  void run(const std::string& data, const Object& resources, const GraphicsState& initial, int depth) {
    std::vector<GraphicsState> stack;
    GraphicsState gs = initial;
    Matrix tm, tlm;
    std::vector<Subpath> path;
    Point current;
    std::vector<Object> ops;

    const Object res = file_.resolve(resources);

    Lexer lex(data);
    while (true) {
      auto obj = lex.next();
      if (!obj) break;
      if (!obj->is_keyword()) {
        ops.push_back(std::move(*obj));
        continue;
      }
      const std::string& op = obj->keyword();
      auto num = [&](std::size_t i) { return i < ops.size() ? ops[i].number() : 0.0; };
      auto have = [&](std::size_t n) { return ops.size() >= n; };

      if (op == "q") {
        stack.push_back(gs);
      } else if (op == "Q") {
        if (!stack.empty()) {
          gs = stack.back();
          stack.pop_back();
        }
      } else if (op == "cm" && have(6)) {
        const auto base = ops.size() - 6;
        Matrix m{num(base), num(base + 1), num(base + 2), num(base + 3), num(base + 4), num(base + 5)};
        gs.ctm = m * gs.ctm;
      } else if (op == "w" && have(1)) {
        gs.line_width = num(ops.size() - 1);
      } else if (op == "BT") {
        tm = Matrix{};
        tlm = Matrix{};
      } else if (op == "ET") {
        // nothing
      } else if (op == "Tf" && have(2)) {
        const auto& name_obj = ops[ops.size() - 2];
        gs.text.size = num(ops.size() - 1);
        gs.text.font = name_obj.is_name() ? font_for(res, name_obj.name()) : nullptr;
      } else if (op == "Tc" && have(1)) {
        gs.text.char_spacing = num(ops.size() - 1);
      } else if (op == "Tw" && have(1)) {
        gs.text.word_spacing = num(ops.size() - 1);
      } else if (op == "Tz" && have(1)) {
        gs.text.horizontal_scale = num(ops.size() - 1) / 100.0;
      } else if (op == "TL" && have(1)) {
        gs.text.leading = num(ops.size() - 1);
      } else if (op == "Ts" && have(1)) {
        gs.text.rise = num(ops.size() - 1);
      } else if ((op == "Td" || op == "TD") && have(2)) {
        const double tx = num(ops.size() - 2), ty = num(ops.size() - 1);
        if (op == "TD") gs.text.leading = -ty;
        tlm = Matrix::translate(tx, ty) * tlm;
        tm = tlm;
      } else if (op == "Tm" && have(6)) {
        const auto base = ops.size() - 6;
        tlm = Matrix{num(base), num(base + 1), num(base + 2), num(base + 3), num(base + 4), num(base + 5)};
        tm = tlm;
      } else if (op == "T*") {
        tlm = Matrix::translate(0, -gs.text.leading) * tlm;
        tm = tlm;
      } else if (op == "Tj" && have(1)) {
        show(ops.back(), gs, tm);
      } else if (op == "'" && have(1)) {
        tlm = Matrix::translate(0, -gs.text.leading) * tlm;
        tm = tlm;
        show(ops.back(), gs, tm);
      } else if (op == "\"" && have(3)) {
        gs.text.word_spacing = num(ops.size() - 3);
        gs.text.char_spacing = num(ops.size() - 2);
        tlm = Matrix::translate(0, -gs.text.leading) * tlm;
        tm = tlm;
        show(ops.back(), gs, tm);
      } else if (op == "TJ" && have(1) && ops.back().is_array()) {
        for (const auto& item : ops.back().array()) {
          if (item.is_string()) {
            show(item, gs, tm);
          } else if (item.is_number()) {
            const double tx = -item.number() / 1000.0 * gs.text.size * gs.text.horizontal_scale;
            tm = Matrix::translate(tx, 0) * tm;
          }
        }
      } else if (op == "m" && have(2)) {
        current = transform(gs, num(ops.size() - 2), num(ops.size() - 1));
        path.push_back(Subpath{{current}, false});
      } else if (op == "l" && have(2)) {
        current = transform(gs, num(ops.size() - 2), num(ops.size() - 1));
        if (path.empty()) path.push_back(Subpath{});
        path.back().points.push_back(current);
      } else if ((op == "c" && have(6)) || ((op == "v" || op == "y") && have(4))) {
        // curves never form rulings; break the subpath at the end point
        current = transform(gs, num(ops.size() - 2), num(ops.size() - 1));
        path.push_back(Subpath{{current}, false});
      } else if (op == "h") {
        if (!path.empty()) path.back().closed = true;
      } else if (op == "re" && have(4)) {
        const auto base = ops.size() - 4;
        const double x = num(base), y = num(base + 1), w = num(base + 2), h = num(base + 3);
        Subpath sp;
        sp.points = {transform(gs, x, y), transform(gs, x + w, y), transform(gs, x + w, y + h), transform(gs, x, y + h)};
        sp.closed = true;
        current = sp.points.front();
        path.push_back(std::move(sp));
      } else if (op == "S" || op == "s" || op == "B" || op == "B*" || op == "b" || op == "b*") {
        if (op == "s" || op == "b" || op == "b*") {
          if (!path.empty()) path.back().closed = true;
        }
        stroke(path, gs);
        path.clear();
      } else if (op == "f" || op == "F" || op == "f*") {
        fill(path);
        path.clear();
      } else if (op == "n") {
        path.clear();
      } else if (op == "Do" && have(1) && ops.back().is_name()) {
        do_xobject(res, ops.back().name(), gs, depth);
      } else if (op == "BI") {
        skip_inline_image(lex);
        add_image(gs);
      }
      ops.clear();
    }
  }

 private:
  Point transform(const GraphicsState& gs, double x, double y) const {
    Point p;
    gs.ctm.apply(x, y, p.x, p.y);
    return p;
  }

  const Font* font_for(const Object& resources, const std::string& name) {
    if (!resources.is_dict()) return nullptr;
    const Object fonts = file_.get_resolved(resources.dict(), "Font");
    if (!fonts.is_dict()) return nullptr;
    const Object* entry = fonts.dict().find(name);
    if (!entry) return nullptr;
    const void* key = nullptr;
    Ref ref{};
    if (entry->is_ref()) {
      ref = entry->ref();
    } else {
      key = entry;
    }
    auto& slot = key ? inline_fonts_[key] : fonts_[ref];
    if (!slot) slot = std::make_unique<Font>(Font::load(file_, *entry));
    return slot.get();
  }

  void show(const Object& str, const GraphicsState& gs, Matrix& tm) {
    if (!str.is_string() || !gs.text.font) return;
    const TextState& ts = gs.text;
    for (const auto& g : ts.font->decode(str.str())) {
      const Matrix params{ts.size * ts.horizontal_scale, 0, 0, ts.size, 0, ts.rise};
      const Matrix trm = params * tm * gs.ctm;

      RawGlyph rg;
      rg.text = g.text;
      const double asc = ts.font->ascent(), dsc = ts.font->descent();
      const double w = g.width;
      double xs[4], ys[4];
      trm.apply(0, dsc, xs[0], ys[0]);
      trm.apply(w, dsc, xs[1], ys[1]);
      trm.apply(w, asc, xs[2], ys[2]);
      trm.apply(0, asc, xs[3], ys[3]);
      rg.box = {std::min({xs[0], xs[1], xs[2], xs[3]}), std::min({ys[0], ys[1], ys[2], ys[3]}),
                std::max({xs[0], xs[1], xs[2], xs[3]}), std::max({ys[0], ys[1], ys[2], ys[3]})};
      double ox, oy;
      trm.apply(0, 0, ox, oy);
      rg.baseline = oy;
      rg.font_size = std::hypot(trm.c, trm.d);
      const double tol = 1e-6 * std::max(1.0, rg.font_size);
      rg.upright = std::abs(trm.b) <= tol && std::abs(trm.c) <= tol && trm.a > 0 && trm.d > 0;
      out_.glyphs.push_back(std::move(rg));

      const double tx = (w * ts.size + ts.char_spacing + (g.word_space ? ts.word_spacing : 0)) * ts.horizontal_scale;
      tm = Matrix::translate(tx, 0) * tm;
    }
  }

  void stroke(const std::vector<Subpath>& path, const GraphicsState& gs) {
    const double scale = std::sqrt(std::abs(gs.ctm.a * gs.ctm.d - gs.ctm.b * gs.ctm.c));
    const double width = std::max(gs.line_width, 0.0) * scale;
    for (const auto& sp : path) {
      for (std::size_t i = 1; i < sp.points.size(); ++i) {
        out_.segments.push_back({sp.points[i - 1].x, sp.points[i - 1].y, sp.points[i].x, sp.points[i].y, width});
      }
      if (sp.closed && sp.points.size() > 2) {
        const auto& a = sp.points.back();
        const auto& b = sp.points.front();
        out_.segments.push_back({a.x, a.y, b.x, b.y, width});
      }
    }
  }

  void fill(const std::vector<Subpath>& path) {
    for (const auto& sp : path) {
      auto pts = sp.points;
      if (pts.size() == 5 && std::abs(pts[4].x - pts[0].x) < 1e-6 && std::abs(pts[4].y - pts[0].y) < 1e-6) pts.pop_back();
      if (pts.size() != 4) continue;
      double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
      for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
      // axis-aligned check: every vertex sits on the bounding box corners
      bool aligned = true;
      for (const auto& p : pts) {
        const bool on_x = std::abs(p.x - x0) < 0.01 || std::abs(p.x - x1) < 0.01;
        const bool on_y = std::abs(p.y - y0) < 0.01 || std::abs(p.y - y1) < 0.01;
        aligned = aligned && on_x && on_y;
      }
      if (!aligned) continue;
      const double w = x1 - x0, h = y1 - y0;
      if (h <= kMaxFilledRuleThickness && w > h) {
        out_.segments.push_back({x0, (y0 + y1) / 2, x1, (y0 + y1) / 2, h});
      } else if (w <= kMaxFilledRuleThickness && h > w) {
        out_.segments.push_back({(x0 + x1) / 2, y0, (x0 + x1) / 2, y1, w});
      }
    }
  }

  void add_image(const GraphicsState& gs) {
    double xs[4], ys[4];
    gs.ctm.apply(0, 0, xs[0], ys[0]);
    gs.ctm.apply(1, 0, xs[1], ys[1]);
    gs.ctm.apply(1, 1, xs[2], ys[2]);
    gs.ctm.apply(0, 1, xs[3], ys[3]);
    out_.images.push_back({std::min({xs[0], xs[1], xs[2], xs[3]}), std::min({ys[0], ys[1], ys[2], ys[3]}),
                           std::max({xs[0], xs[1], xs[2], xs[3]}), std::max({ys[0], ys[1], ys[2], ys[3]})});
  }

  void do_xobject(const Object& resources, const std::string& name, const GraphicsState& gs, int depth) {
    if (!resources.is_dict()) return;
    const Object xobjects = file_.get_resolved(resources.dict(), "XObject");
    if (!xobjects.is_dict()) return;
    const Object xo = file_.resolve(xobjects.dict().get(name));
    if (!xo.is_stream()) return;
    const Dict& d = xo.dict();
    if (d.get("Subtype").is_name("Image")) {
      add_image(gs);
      return;
    }
    if (!d.get("Subtype").is_name("Form") || depth >= kMaxFormDepth) return;
    GraphicsState inner = gs;
    const Object m = file_.get_resolved(d, "Matrix");
    if (m.is_array() && m.array().size() == 6) {
      const auto& a = m.array();
      Matrix fm{file_.resolve(a[0]).number(), file_.resolve(a[1]).number(), file_.resolve(a[2]).number(),
                file_.resolve(a[3]).number(), file_.resolve(a[4]).number(), file_.resolve(a[5]).number()};
      inner.ctm = fm * gs.ctm;
    }
    const Object form_res = d.find("Resources") ? d.get("Resources") : resources;
    run(decode_stream(xo.stream()), form_res, inner, depth + 1);
  }

  static void skip_inline_image(Lexer& lex) {
    // parameters up to ID, then binary data terminated by whitespace + EI
    while (auto o = lex.next()) {
      if (o->is_keyword("ID")) break;
    }
    const std::string_view data = lex.data();
    std::size_t p = lex.pos() + 1;
    while (p + 2 <= data.size()) {
      if (data[p] == 'E' && data[p + 1] == 'I' && p > 0 && is_pdf_whitespace(data[p - 1]) &&
          (p + 2 == data.size() || is_pdf_whitespace(data[p + 2]) || is_pdf_delimiter(data[p + 2]))) {
        lex.seek(p + 2);
        return;
      }
      ++p;
    }
    lex.seek(data.size());
  }

  const File& file_;
  PageContent& out_;
  std::map<Ref, std::unique_ptr<Font>> fonts_;
  std::map<const void*, std::unique_ptr<Font>> inline_fonts_;
};

}  // namespace

PageContent interpret_page(const File& file, const Object& contents, const Object& resources,
                           const Matrix& base) {
  std::string data;
  const Object c = file.resolve(contents);
  if (c.is_stream()) {
    data = decode_stream(c.stream());
  } else if (c.is_array()) {
    for (const auto& part : c.array()) {
      const Object s = file.resolve(part);
      if (s.is_stream()) {
        data += decode_stream(s.stream());
        data += '\n';
      }
    }
  }
  PageContent out;
  Interpreter interp(file, out);
  GraphicsState gs;
  gs.ctm = base;
  interp.run(data, resources, gs, 0);
  return out;
}

}  // namespace surveykg::pdf
