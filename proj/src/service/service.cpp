#include "surveykg/service/service.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "surveykg/format/edits.hpp"
#include "surveykg/layout/layout.hpp"
#include "surveykg/pipeline/pipeline.hpp"
#include "surveykg/text.hpp"

namespace surveykg::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view step_name(Step s) {
  switch (s) {
    case Step::Upload: return "Upload";
    case Step::SelectRegion: return "SelectRegion";
    case Step::EditTable: return "EditTable";
    case Step::ResolveRefs: return "ResolveRefs";
    case Step::Ingest: return "Ingest";
    case Step::Done: return "Done";
  }
  return "Upload";
}

namespace {

/// Request failure carrying its HTTP status.
struct HttpError {
  int status;
  std::string error;
  std::string message;
  json extra = json::object();
};

int status_for(Errc code) {
  switch (code) {
    case Errc::ServiceUnavailable: return 502;
    case Errc::UsageError: return 400;
    default: return 422;
  }
}

/// Serializes calls into a client that is not safe for concurrent use.
class LockedClient : public refs::MetadataClient {
 public:
  explicit LockedClient(refs::MetadataClient& inner) : inner_(inner) {}
  std::optional<refs::MetadataRecord> by_doi(const std::string& doi) override {
    std::lock_guard lock(mutex_);
    return inner_.by_doi(doi);
  }
  std::vector<refs::MetadataRecord> search_title(const std::string& title, int rows) override {
    std::lock_guard lock(mutex_);
    return inner_.search_title(title, rows);
  }

 private:
  refs::MetadataClient& inner_;
  std::mutex mutex_;
};

json rect_json(double x0, double y0, double x1, double y1) { return {{"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1}}; }

json grid_json(const extract::TableGrid& g) {
  json rows = json::array();
  for (const auto& row : g.cells) {
    json cells = json::array();
    for (const auto& c : row) {
      cells.push_back({{"text", c.text}, {"bbox", rect_json(c.bbox.x0, c.bbox.y0, c.bbox.x1, c.bbox.y1)}});
    }
    rows.push_back(std::move(cells));
  }
  return {{"n_rows", g.n_rows},
          {"n_cols", g.n_cols},
          {"method", extract::method_name(g.method)},
          {"region", layout::format_region(g.source_region)},
          {"cells", std::move(rows)}};
}

json table_json(const format::SurveyTable& t) {
  json columns = json::array();
  const auto headers = format::render_headers(t.columns);
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    const auto& c = t.columns[i];
    columns.push_back({{"label", c.label},
                       {"kind", format::kind_name(c.kind)},
                       {"role", format::role_name(c.role)},
                       {"header", headers[i]}});
  }
  json legend = nullptr;
  if (t.legend) legend = *t.legend;
  return {{"columns", std::move(columns)}, {"rows", t.rows}, {"legend", std::move(legend)}};
}

json violations_json(const std::vector<format::Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) {
    json row = v.row ? json(*v.row) : json(nullptr);
    json col = v.column ? json(*v.column) : json(nullptr);
    out.push_back({{"rule", v.rule}, {"row", row}, {"column", col}, {"message", v.message}});
  }
  return out;
}

json entry_json(const refs::BibEntry& e) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return {{"key", e.key ? json(refs::render_key(*e.key)) : json(nullptr)},
          {"raw", e.raw},
          {"title", opt(e.title)},
          {"authors", e.authors},
          {"year", opt(e.year)},
          {"month", opt(e.month)},
          {"doi", opt(e.doi)}};
}

json link_json(const refs::LinkResult& l, bool automatic) {
  return {{"row", l.row_index},
          {"key", l.key_text},
          {"linked", l.linked()},
          {"automatic", automatic},
          {"entry", l.entry ? entry_json(*l.entry) : json(nullptr)}};
}

json work_json(const refs::MetadataRecord& r) {
  json authors = json::array();
  for (const auto& a : r.authors) {
    const auto comma = a.find(", ");
    if (comma == std::string::npos) {
      authors.push_back({{"name", a}});
    } else {
      authors.push_back({{"family", a.substr(0, comma)}, {"given", a.substr(comma + 2)}});
    }
  }
  json work = {{"DOI", r.doi}, {"title", json::array({r.title})}, {"author", std::move(authors)}};
  if (r.year) {
    json parts = json::array({*r.year});
    if (r.month) parts.push_back(*r.month);
    work["issued"] = {{"date-parts", json::array({parts})}};
  }
  return work;
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
  return os.str();
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw HttpError{400, "BadRequest", "request body must be a JSON object"};
  return body;
}

std::string string_field(const json& body, const char* name, bool required) {
  if (!body.contains(name) || body[name].is_null()) {
    if (required) throw HttpError{400, "BadRequest", std::string("missing field '") + name + "'"};
    return "";
  }
  if (!body[name].is_string()) throw HttpError{400, "BadRequest", std::string("field '") + name + "' must be a string"};
  return body[name].get<std::string>();
}

}  // namespace

struct Session {
  std::mutex mutex;
  std::string id;
  Step step = Step::Upload;
  layout::Document document;
  std::optional<extract::TableGrid> grid;
  std::optional<format::SurveyTable> table;
  std::vector<refs::LinkResult> links;
  std::vector<bool> automatic;
  json ingest_result;
  Clock::time_point last_used = Clock::now();

  json describe() const {
    json links_out = json::array();
    for (std::size_t i = 0; i < links.size(); ++i) links_out.push_back(link_json(links[i], automatic[i]));
    return {{"id", id},
            {"step", step_name(step)},
            {"pages", document.page_count()},
            {"grid", grid ? grid_json(*grid) : json(nullptr)},
            {"table", table ? table_json(*table) : json(nullptr)},
            {"links", std::move(links_out)},
            {"ingest", ingest_result}};
  }
};

struct Service::Impl {
  ServiceOptions options;
  graph::GraphStore store;
  std::unique_ptr<LockedClient> metadata;
  std::unique_ptr<refs::MockMetadataClient> mock;
  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  refs::MetadataClient* client() { return metadata.get(); }

  std::shared_ptr<Session> find(const std::string& id) {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "UnknownSession", "no session '" + id + "'"};
    return it->second;
  }

  static void require(const Session& s, std::initializer_list<Step> allowed) {
    if (std::find(allowed.begin(), allowed.end(), s.step) != allowed.end()) return;
    std::string names;
    for (Step a : allowed) names += (names.empty() ? "" : " or ") + std::string(step_name(a));
    throw HttpError{409, "StepOrder",
                    "session is at " + std::string(step_name(s.step)) + "; this call needs " + names,
                    {{"step", step_name(s.step)}}};
  }

  /// Runs a session handler under the session guard.
  template <typename Fn>
  void with_session(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    const auto session = find(req.matches[1]);
    std::lock_guard lock(session->mutex);
    session->last_used = Clock::now();
    fn(*session, res);
  }

  // ---- handlers ----

  void create(const httplib::Request& req, httplib::Response& res) {
    std::string bytes;
    std::string name = "upload.pdf";
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw HttpError{400, "BadRequest", "multipart upload needs a 'file' field"};
      const auto file = req.get_file_value("file");
      bytes = file.content;
      if (!file.filename.empty()) name = file.filename;
    } else {
      bytes = req.body;
    }
    if (bytes.empty()) throw HttpError{400, "BadRequest", "empty upload"};
    auto session = std::make_shared<Session>();
    session->document = layout::load_document_from_memory(std::move(bytes), name);
    session->id = new_session_id();
    session->step = Step::SelectRegion;
    {
      std::unique_lock lock(sessions_mutex);
      sessions.emplace(session->id, session);
    }
    res.status = 201;
    res.set_content(json({{"id", session->id}, {"step", step_name(session->step)}, {"pages", session->document.page_count()}})
                        .dump(),
                    "application/json");
  }

  void page(Session& s, const httplib::Request& req, httplib::Response& res) {
    const std::string n = req.matches[2];
    const std::size_t index = std::stoul(n);
    if (index >= s.document.page_count()) {
      throw HttpError{404, "PageOutOfRange", "page " + n + " of " + std::to_string(s.document.page_count())};
    }
    const auto& page = s.document.pages[index];
    json words = json::array();
    for (const auto& line : layout::group_lines(page.glyphs, layout::kReadingOrderTolerance)) {
      for (const auto& word : layout::split_words(line.glyphs)) {
        layout::Rect box{word.front().x0, word.front().y0, word.front().x1, word.front().y1};
        for (const auto& g : word) {
          box.x0 = std::min(box.x0, g.x0);
          box.y0 = std::min(box.y0, g.y0);
          box.x1 = std::max(box.x1, g.x1);
          box.y1 = std::max(box.y1, g.y1);
        }
        json glyphs = json::array();
        for (const auto& g : word) glyphs.push_back({{"text", g.text}, {"bbox", rect_json(g.x0, g.y0, g.x1, g.y1)}});
        words.push_back({{"text", layout::join_line(word)},
                         {"bbox", rect_json(box.x0, box.y0, box.x1, box.y1)},
                         {"glyphs", std::move(glyphs)}});
      }
    }
    json rulings = json::array();
    for (const auto& r : page.rulings) {
      rulings.push_back({{"orientation", r.horizontal() ? "horizontal" : "vertical"},
                         {"position", r.position},
                         {"start", r.start},
                         {"end", r.end},
                         {"thickness", r.thickness}});
    }
    json images = json::array();
    for (const auto& im : page.images) images.push_back(rect_json(im.x0, im.y0, im.x1, im.y1));
    res.set_content(json({{"index", page.index},
                          {"width", page.width},
                          {"height", page.height},
                          {"words", std::move(words)},
                          {"rulings", std::move(rulings)},
                          {"images", std::move(images)}})
                        .dump(),
                    "application/json");
  }

  void extract(Session& s, const httplib::Request& req, httplib::Response& res) {
    require(s, {Step::SelectRegion, Step::EditTable});
    const json body = parse_body(req);
    std::vector<layout::Region> regions;
    if (body.contains("region") && body["region"].is_array()) {
      for (const auto& r : body["region"]) {
        if (!r.is_string()) throw HttpError{400, "BadRequest", "region entries must be strings"};
        regions.push_back(layout::parse_region(r.get<std::string>()));
      }
    } else {
      regions.push_back(layout::parse_region(string_field(body, "region", true)));
    }
    const std::string mode = string_field(body, "mode", false);
    const auto method = extract::parse_method(mode.empty() ? "lattice" : mode);
    auto grid = pipeline::extract_regions(s.document, regions, method);
    json issues = json::array();
    for (const auto& i : extract::diagnose(grid)) {
      issues.push_back({{"kind", extract::issue_kind_name(i.kind)}, {"row", i.row}, {"column", i.column}, {"note", i.note}});
    }
    s.grid = std::move(grid);
    s.table.reset();
    s.step = Step::EditTable;
    res.set_content(json({{"grid", grid_json(*s.grid)}, {"issues", std::move(issues)}, {"step", step_name(s.step)}}).dump(),
                    "application/json");
  }

  void put_table(Session& s, const httplib::Request& req, httplib::Response& res) {
    require(s, {Step::EditTable, Step::ResolveRefs, Step::Ingest});
    const json body = parse_body(req);
    std::string script;
    if (body.contains("edits") && body["edits"].is_array()) {
      for (const auto& line : body["edits"]) {
        if (!line.is_string()) throw HttpError{400, "BadRequest", "edits entries must be strings"};
        script += line.get<std::string>() + "\n";
      }
    } else {
      script = string_field(body, "edits", false);
    }
    format::SurveyTable table = format::apply_edit_script(format::from_grid(*s.grid), script);
    const auto violations = format::validate(table);
    if (!violations.empty()) {
      throw HttpError{422, "RuleViolations", "the edited table breaks formatting rules",
                      {{"violations", violations_json(violations)}, {"table", table_json(table)}}};
    }
    // Links are computed before any state changes so a metadata failure leaves the session as it was.
    auto links = pipeline::auto_link(table, pipeline::reference_entries(s.document), client());
    s.table = std::move(table);
    s.links = std::move(links);
    s.automatic.clear();
    for (const auto& l : s.links) s.automatic.push_back(l.linked());
    advance_refs(s);
    json links_out = json::array();
    for (std::size_t i = 0; i < s.links.size(); ++i) links_out.push_back(link_json(s.links[i], s.automatic[i]));
    res.set_content(json({{"table", table_json(*s.table)},
                          {"violations", json::array()},
                          {"links", std::move(links_out)},
                          {"step", step_name(s.step)}})
                        .dump(),
                    "application/json");
  }

  static void advance_refs(Session& s) {
    const bool all = std::all_of(s.links.begin(), s.links.end(), [](const auto& l) { return l.linked(); });
    s.step = all ? Step::Ingest : Step::ResolveRefs;
  }

  void resolve(Session& s, const httplib::Request& req, httplib::Response& res) {
    require(s, {Step::ResolveRefs, Step::Ingest});
    const json body = parse_body(req);
    if (!body.contains("row") || !body["row"].is_number_integer()) {
      throw HttpError{400, "BadRequest", "missing integer field 'row'"};
    }
    const auto row = body["row"].get<long long>();
    if (row < 0 || row >= static_cast<long long>(s.links.size())) {
      throw Error(Errc::IndexOutOfRange, "row " + std::to_string(row) + " of " + std::to_string(s.links.size()));
    }
    const std::string citation = string_field(body, "citation_text", true);
    if (text::trim(citation).empty()) throw HttpError{400, "BadRequest", "empty citation_text"};
    auto entry = pipeline::manual_entry(citation, client());
    auto& link = s.links[static_cast<std::size_t>(row)];
    link.entry = std::move(entry);
    s.automatic[static_cast<std::size_t>(row)] = false;
    advance_refs(s);
    res.set_content(json({{"link", link_json(link, false)}, {"step", step_name(s.step)}}).dump(), "application/json");
  }

  void ingest(Session& s, const httplib::Request& req, httplib::Response& res) {
    require(s, {Step::Ingest});
    const json body = parse_body(req);
    graph::SettingsEntry entry;
    entry.table_id = string_field(body, "table_id", false);
    if (entry.table_id.empty()) entry.table_id = "session/" + s.id;
    entry.title = string_field(body, "title", false);
    entry.source_reference = string_field(body, "source_reference", false);
    const format::SurveyTable linked = refs::append_metadata_columns(*s.table, s.links);
    const std::string comparison = store.create_comparison(entry);
    const auto contributions = store.ingest_table(linked, comparison);
    std::map<std::string, std::string> paper_of;
    for (const auto& st : store.statements()) {
      if (st.predicate == "P5") paper_of[st.object] = st.subject;
    }
    json papers = json::array();
    std::vector<std::string> seen;
    for (const auto& c : contributions) {
      const std::string& p = paper_of[c];
      if (std::find(seen.begin(), seen.end(), p) == seen.end()) {
        seen.push_back(p);
        papers.push_back(p);
      }
    }
    s.ingest_result = {{"comparison_id", comparison}, {"paper_ids", std::move(papers)}, {"contribution_ids", contributions}};
    s.step = Step::Done;
    res.set_content(s.ingest_result.dump(), "application/json");
  }

  void works(const httplib::Request& req, httplib::Response& res) {
    if (!mock) throw HttpError{404, "NotFound", "no metadata records configured"};
    if (req.matches.size() > 1 && !std::string(req.matches[1]).empty()) {
      const auto r = mock->by_doi(req.matches[1]);
      if (!r) throw HttpError{404, "NotFound", "no work " + std::string(req.matches[1])};
      res.set_content(json({{"status", "ok"}, {"message-type", "work"}, {"message", work_json(*r)}}).dump(),
                      "application/json");
      return;
    }
    const std::string query = req.get_param_value("query.bibliographic");
    int rows = 20;
    if (req.has_param("rows")) {
      try {
        rows = std::clamp(std::stoi(req.get_param_value("rows")), 1, 1000);
      } catch (const std::exception&) {
        throw HttpError{400, "BadRequest", "rows must be an integer"};
      }
    }
    json items = json::array();
    for (const auto& r : mock->search_title(query, rows)) items.push_back(work_json(r));
    const auto total = items.size();
    res.set_content(json({{"status", "ok"},
                          {"message-type", "work-list"},
                          {"message", {{"total-results", total}, {"items", std::move(items)}}}})
                        .dump(),
                    "application/json");
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  if (impl_->options.store_path) impl_->store = graph::GraphStore::open(*impl_->options.store_path);
  if (impl_->options.metadata) impl_->metadata = std::make_unique<LockedClient>(*impl_->options.metadata);
  if (!impl_->options.mock_records.empty()) {
    impl_->mock = std::make_unique<refs::MockMetadataClient>(impl_->options.mock_records);
  }
}

Service::~Service() = default;

std::size_t Service::evict_idle(Clock::time_point now) {
  std::unique_lock lock(impl_->sessions_mutex);
  std::size_t dropped = 0;
  for (auto it = impl_->sessions.begin(); it != impl_->sessions.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    if (session_lock.owns_lock() && now - it->second->last_used > impl_->options.idle_ttl) {
      session_lock.unlock();
      it = impl_->sessions.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

const graph::GraphStore& Service::store() const { return impl_->store; }

void Service::mount(httplib::Server& server) {
  Impl& impl = *impl_;
  const std::string base(kBasePath);
  const std::string sid = base + "/sessions/([^/]+)";

  server.set_payload_max_length(kMaxUploadBytes);

  // Wraps a handler with error mapping and idle eviction.
  auto handle = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      evict_idle(Clock::now());
      try {
        fn(req, res);
        return;
      } catch (const HttpError& e) {
        json body = e.extra;
        body["error"] = e.error;
        body["message"] = e.message;
        res.status = e.status;
        res.set_content(body.dump(), "application/json");
      } catch (const UnresolvedRowsError& e) {
        res.status = 409;
        res.set_content(json({{"error", errc_name(e.code())}, {"message", e.what()}, {"rows", e.rows()}}).dump(),
                        "application/json");
      } catch (const Error& e) {
        res.status = status_for(e.code());
        res.set_content(json({{"error", errc_name(e.code())}, {"message", e.what()}}).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json({{"error", "Internal"}, {"message", e.what()}}).dump(), "application/json");
      }
    };
  };
  auto session_route = [&impl](void (Impl::*member)(Session&, const httplib::Request&, httplib::Response&)) {
    return [&impl, member](const httplib::Request& req, httplib::Response& res) {
      impl.with_session(req, res, [&](Session& s, httplib::Response& r) { (impl.*member)(s, req, r); });
    };
  };

  server.Post(base + "/sessions", handle([&impl](const auto& req, auto& res) { impl.create(req, res); }));
  server.Get(sid, handle([&impl](const httplib::Request& req, httplib::Response& res) {
               impl.with_session(req, res, [](Session& s, httplib::Response& r) {
                 r.set_content(s.describe().dump(), "application/json");
               });
             }));
  server.Delete(sid, handle([&impl](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const auto session = impl.find(id);
                  std::lock_guard session_lock(session->mutex);
                  std::unique_lock lock(impl.sessions_mutex);
                  impl.sessions.erase(id);
                  res.status = 204;
                }));
  server.Get(sid + "/pages/([0-9]+)", handle(session_route(&Impl::page)));
  server.Post(sid + "/extract", handle(session_route(&Impl::extract)));
  server.Put(sid + "/table", handle(session_route(&Impl::put_table)));
  server.Post(sid + "/refs/resolve", handle(session_route(&Impl::resolve)));
  server.Post(sid + "/ingest", handle(session_route(&Impl::ingest)));

  server.Get(base + "/graph/export", handle([&impl](const httplib::Request& req, httplib::Response& res) {
               const std::string format = req.has_param("format") ? req.get_param_value("format") : "nt";
               if (format == "nt") {
                 res.set_content(impl.store.export_ntriples(), "application/n-triples");
               } else if (format == "json") {
                 res.set_content(impl.store.export_json(), "application/json");
               } else {
                 throw HttpError{400, "BadRequest", "format must be nt or json"};
               }
             }));
  server.Get(base + "/graph/comparisons/([A-Za-z0-9]+)", handle([&impl](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const auto comparisons = impl.store.comparisons();
               if (std::find(comparisons.begin(), comparisons.end(), id) == comparisons.end()) {
                 throw HttpError{404, "UnknownComparison", "no comparison '" + id + "'"};
               }
               const auto r = impl.store.resource(id);
               json out = table_json(impl.store.render_comparison(id));
               out["id"] = id;
               out["label"] = r ? r->label : "";
               out["contribution_ids"] = impl.store.contributions_of(id);
               res.set_content(out.dump(), "application/json");
             }));
  server.Get(base + "/stats", handle([&impl](const httplib::Request&, httplib::Response& res) {
               const auto s = impl.store.stats();
               res.set_content(json({{"papers", s.papers},
                                     {"contributions", s.contributions},
                                     {"comparisons", s.comparisons},
                                     {"resources", s.resources},
                                     {"statements", s.statements},
                                     {"cells_plain", s.cells_plain},
                                     {"cells_with_meta", s.cells_with_meta}})
                                   .dump(),
                               "application/json");
             }));
  server.Get(base + "/metadata/works/(.+)",
             handle([&impl](const httplib::Request& req, httplib::Response& res) { impl.works(req, res); }));
  server.Get(base + "/metadata/works",
             handle([&impl](const httplib::Request& req, httplib::Response& res) { impl.works(req, res); }));

  const std::string origin = impl.options.cors_origin;
  server.Options(base + "/.*", [origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
    res.status = 204;
  });
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
  });
}

}  // namespace surveykg::service
