#include "surveykg/graph/store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "surveykg/error.hpp"
#include "surveykg/refs/refs.hpp"
#include "surveykg/text.hpp"

namespace surveykg::graph {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "SURVEYKG-STORE 1";
constexpr std::string_view kIriBase = "urn:surveykg:";
constexpr std::string_view kRdfsLabel = "<http://www.w3.org/2000/01/rdf-schema#label>";
constexpr std::string_view kRdfType = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

enum Reserved : std::size_t {
  kHasTitle,
  kHasAuthor,
  kHasMonth,
  kHasYear,
  kHasDoi,
  kHasContribution,
  kHasSourceReference,
  kCompareContribution,
  kHasReferenceKey,
  kHasTableId,
  kReservedCount
};

std::string pid(std::size_t i) { return "P" + std::to_string(i); }
std::string rid(std::size_t i) { return "R" + std::to_string(i); }

std::optional<std::size_t> index_of(const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return std::nullopt;
  std::size_t v = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(id[i] - '0');
  }
  if (rid(v).substr(1) != id.substr(1)) return std::nullopt;  // no leading zeros
  return v;
}

std::string nt_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string iri(std::string_view kind, std::string_view id) {
  return "<" + std::string(kIriBase) + std::string(kind) + ":" + std::string(id) + ">";
}

std::string literal(std::string_view v) { return "\"" + nt_escape(v) + "\""; }

bool blank(std::string_view s) { return text::trim(s).empty(); }

}  // namespace

std::string paper_key(std::string_view doi, std::string_view title) {
  if (!blank(doi)) return "doi:" + text::casefold(text::trim(doi));
  std::string t = text::normalize_key(title);
  while (!t.empty() && std::string_view(".,;:!?").find(t.back()) != std::string_view::npos) t.pop_back();
  t = text::trim(t);
  if (t.empty()) return "";
  return "title:" + t;
}

struct GraphStore::Impl {
  mutable std::shared_mutex mu;
  std::vector<Resource> resources;
  std::vector<Predicate> predicates;
  std::vector<Statement> statements;
  std::vector<std::vector<std::size_t>> by_subject;  // statement indices per resource
  std::set<std::tuple<std::string, std::string, std::string, bool>> statement_set;
  std::map<std::pair<std::string, std::string>, std::size_t> resource_index;  // (class or "", key)
  std::map<std::string, std::size_t> predicate_index;
  std::map<std::string, std::string> paper_by_doi;
  std::map<std::string, std::string> paper_by_title;
  std::map<std::string, std::string> paper_of_contribution;
  std::map<std::pair<std::string, std::string>, std::string> contribution_by_pair;  // (paper, comparison)
  std::map<std::string, std::vector<std::string>> comparison_contributions;
  std::map<std::string, std::size_t> contributions_per_paper;

  std::filesystem::path path;
  std::ofstream log;

  Impl() {
    for (std::size_t i = 0; i < kReservedCount; ++i) {
      predicates.push_back({pid(i), std::string(kReservedPredicates[i]), true});
      predicate_index[text::normalize_key(kReservedPredicates[i])] = i;
    }
  }

  // --- primitives (no locking, no validation beyond integrity) ---

  const Resource& add_resource(std::string label, std::set<std::string> classes, bool record) {
    Resource r{rid(resources.size()), std::move(label), std::move(classes)};
    const std::string key = text::normalize_key(r.label);
    if (r.classes.empty()) {
      resource_index.emplace(std::make_pair(std::string(), key), resources.size());
    }
    for (const auto& c : r.classes) resource_index.emplace(std::make_pair(c, key), resources.size());
    resources.push_back(r);
    by_subject.emplace_back();
    if (record) append({{"r", r.id}, {"l", r.label}, {"c", r.classes}});
    return resources.back();
  }

  const Predicate& add_predicate(std::string label, bool record) {
    Predicate p{pid(predicates.size()), std::move(label), false};
    predicate_index.emplace(text::normalize_key(p.label), predicates.size());
    predicates.push_back(p);
    if (record) append({{"p", p.id}, {"l", p.label}});
    return predicates.back();
  }

  /// Returns false for an exact duplicate.
  bool add_statement(const Statement& s, bool record) {
    if (!statement_set.emplace(s.subject, s.predicate, s.object, s.literal).second) return false;
    const std::size_t subj = *index_of(s.subject, 'R');
    by_subject[subj].push_back(statements.size());
    statements.push_back(s);
    const auto p = index_of(s.predicate, 'P');
    if (p == kHasDoi && has_class(s.subject, kPaperClass)) {
      paper_by_doi.emplace(paper_key(s.object, ""), s.subject);
    } else if (p == kHasTitle && has_class(s.subject, kPaperClass)) {
      const std::string k = paper_key("", s.object);
      if (!k.empty()) paper_by_title.emplace(k, s.subject);
    } else if (p == kHasContribution) {
      paper_of_contribution[s.object] = s.subject;
      ++contributions_per_paper[s.subject];
    } else if (p == kCompareContribution) {
      comparison_contributions[s.subject].push_back(s.object);
      const auto paper = paper_of_contribution.find(s.object);
      if (paper != paper_of_contribution.end()) contribution_by_pair[{paper->second, s.subject}] = s.object;
    }
    if (record) append({{"s", s.subject}, {"p", s.predicate}, {"o", s.object}, {"lit", s.literal}});
    return true;
  }

  void append(const json& j) {
    if (log.is_open()) log << j.dump() << '\n';
  }

  void flush() {
    if (!log.is_open()) return;
    log.flush();
    if (!log) throw Error(Errc::IoError, "cannot write store " + path.string());
  }

  // --- queries ---

  const Resource* find(const std::string& id) const {
    const auto i = index_of(id, 'R');
    if (!i || *i >= resources.size()) return nullptr;
    return &resources[*i];
  }

  bool has_class(const std::string& id, std::string_view cls) const {
    const Resource* r = find(id);
    return r && r->classes.count(std::string(cls));
  }

  std::vector<std::string> objects(const std::string& subject, std::size_t predicate) const {
    std::vector<std::string> out;
    const auto i = index_of(subject, 'R');
    if (!i || *i >= by_subject.size()) return out;
    for (std::size_t si : by_subject[*i]) {
      if (statements[si].predicate == pid(predicate)) out.push_back(statements[si].object);
    }
    return out;
  }

  std::string first_object(const std::string& subject, std::size_t predicate) const {
    const auto o = objects(subject, predicate);
    return o.empty() ? "" : o.front();
  }

  // --- operations ---

  Resource lookup_or_create(std::string_view label, std::optional<std::string_view> cls) {
    const std::string clean = text::nfc(text::trim(label));
    const std::string key = text::normalize_key(clean);
    if (key.empty()) throw Error(Errc::EmptyLabel, "resource label is empty");
    const std::string c = cls ? std::string(*cls) : std::string();
    const auto it = resource_index.find({c, key});
    if (it != resource_index.end()) return resources[it->second];
    std::set<std::string> classes;
    if (cls) classes.insert(c);
    return add_resource(clean, classes, true);
  }

  Predicate lookup_or_create_predicate(std::string_view label) {
    const std::string clean = text::nfc(text::trim(label));
    const std::string key = text::normalize_key(clean);
    if (key.empty()) throw Error(Errc::EmptyLabel, "predicate label is empty");
    const auto it = predicate_index.find(key);
    if (it != predicate_index.end()) return predicates[it->second];
    return add_predicate(clean, true);
  }

  void set_literal(const std::string& subject, std::size_t predicate, const std::string& value) {
    add_statement({subject, pid(predicate), value, true}, true);
  }

  std::string create_comparison(const SettingsEntry& e) {
    const std::string title = text::nfc(text::trim(e.title));
    const std::string source = text::nfc(text::trim(e.source_reference));
    if (title.empty()) throw Error(Errc::MissingTitle, "comparison for table '" + e.table_id + "' has no title");
    if (source.empty()) {
      throw Error(Errc::MissingSourceReference, "comparison for table '" + e.table_id + "' has no source reference");
    }
    const std::string id = add_resource(title, {std::string(kComparisonClass)}, true).id;
    set_literal(id, kHasTitle, title);
    set_literal(id, kHasSourceReference, source);
    if (!blank(e.table_id)) set_literal(id, kHasTableId, text::trim(e.table_id));
    comparison_contributions[id];
    return id;
  }

  std::string ingest_row(const format::SurveyTable& t, std::size_t row, const std::string& comparison) {
    if (!has_class(comparison, kComparisonClass)) {
      throw Error(Errc::UnknownComparison, "no comparison with id '" + comparison + "'");
    }
    if (row >= t.n_rows()) {
      throw Error(Errc::IndexOutOfRange, "row " + std::to_string(row) + " of " + std::to_string(t.n_rows()));
    }
    std::size_t meta[5];
    for (std::size_t m = 0; m < 5; ++m) {
      std::optional<std::size_t> found;
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.columns[c].role == format::Role::Metadata &&
            text::normalize_key(t.columns[c].label) == text::normalize_key(refs::kMetadataLabels[m])) {
          found = c;
          break;
        }
      }
      if (!found) {
        throw Error(Errc::MissingMetadataColumns,
                    "table has no '" + std::string(refs::kMetadataLabels[m]) + "' metadata column");
      }
      meta[m] = *found;
    }
    const auto cell = [&](std::size_t c) {
      return c < t.rows[row].size() ? text::nfc(text::trim(t.rows[row][c])) : std::string();
    };
    const std::string title = cell(meta[0]), authors = cell(meta[1]), month = cell(meta[2]), year = cell(meta[3]),
                      doi = cell(meta[4]);
    if (title.empty() && doi.empty()) {
      throw Error(Errc::UnresolvedReference, "row " + std::to_string(row) + " has neither a title nor a DOI");
    }

    std::string paper;
    if (!doi.empty()) {
      const auto it = paper_by_doi.find(paper_key(doi, ""));
      if (it != paper_by_doi.end()) paper = it->second;
    }
    if (paper.empty() && !title.empty()) {
      const auto it = paper_by_title.find(paper_key("", title));
      // a paper with a different DOI is a different paper
      if (it != paper_by_title.end() && (doi.empty() || objects(it->second, kHasDoi).empty())) paper = it->second;
    }
    if (paper.empty()) paper = add_resource(title.empty() ? doi : title, {std::string(kPaperClass)}, true).id;
    if (!title.empty() && objects(paper, kHasTitle).empty()) set_literal(paper, kHasTitle, title);
    if (objects(paper, kHasAuthor).empty()) {
      for (const auto& a : text::split(authors, ";")) {
        if (!blank(a)) set_literal(paper, kHasAuthor, text::trim(a));
      }
    }
    if (!month.empty() && objects(paper, kHasMonth).empty()) set_literal(paper, kHasMonth, month);
    if (!year.empty() && objects(paper, kHasYear).empty()) set_literal(paper, kHasYear, year);
    if (!doi.empty() && objects(paper, kHasDoi).empty()) set_literal(paper, kHasDoi, doi);

    std::string contribution;
    const auto existing = contribution_by_pair.find({paper, comparison});
    if (existing != contribution_by_pair.end()) {
      contribution = existing->second;
    } else {
      const std::size_t n = contributions_per_paper[paper] + 1;
      contribution = add_resource("Contribution " + std::to_string(n), {std::string(kContributionClass)}, true).id;
      add_statement({paper, pid(kHasContribution), contribution, false}, true);
      add_statement({comparison, pid(kCompareContribution), contribution, false}, true);
    }
    if (const auto rc = t.reference_column()) {
      const std::string key = cell(*rc);
      if (!key.empty()) set_literal(contribution, kHasReferenceKey, key);
    }
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (t.columns[c].role != format::Role::Data) continue;
      const std::string value = cell(c);
      if (value.empty()) continue;
      const Predicate p = lookup_or_create_predicate(t.columns[c].label);
      if (t.columns[c].kind == format::Kind::Resource) {
        add_statement({contribution, p.id, lookup_or_create(value, std::nullopt).id, false}, true);
      } else {
        add_statement({contribution, p.id, value, true}, true);
      }
    }
    return contribution;
  }

  format::SurveyTable render(const std::string& comparison) const {
    if (!has_class(comparison, kComparisonClass)) {
      throw Error(Errc::UnknownComparison, "no comparison with id '" + comparison + "'");
    }
    const auto cit = comparison_contributions.find(comparison);
    const std::vector<std::string> contributions =
        cit == comparison_contributions.end() ? std::vector<std::string>{} : cit->second;

    std::vector<std::string> order;  // data predicate ids in first-use order
    std::map<std::string, bool> all_resources;
    for (const auto& c : contributions) {
      for (std::size_t si : by_subject[*index_of(c, 'R')]) {
        const Statement& s = statements[si];
        if (predicates[*index_of(s.predicate, 'P')].reserved) continue;
        if (!all_resources.count(s.predicate)) {
          order.push_back(s.predicate);
          all_resources[s.predicate] = true;
        }
        all_resources[s.predicate] = all_resources[s.predicate] && !s.literal;
      }
    }
    format::SurveyTable out;
    out.columns.push_back({"Reference", format::Kind::Literal, format::Role::Reference, ""});
    for (const auto& p : order) {
      out.columns.push_back({predicates[*index_of(p, 'P')].label,
                             all_resources[p] ? format::Kind::Resource : format::Kind::Literal, format::Role::Data,
                             ""});
    }
    for (auto m : refs::kMetadataLabels) {
      out.columns.push_back({std::string(m), format::Kind::Literal, format::Role::Metadata, ""});
    }
    for (const auto& c : contributions) {
      format::Row row;
      row.push_back(text::join(objects(c, kHasReferenceKey), "; "));
      for (const auto& p : order) {
        std::vector<std::string> values;
        for (std::size_t si : by_subject[*index_of(c, 'R')]) {
          const Statement& s = statements[si];
          if (s.predicate != p) continue;
          values.push_back(s.literal ? s.object : find(s.object)->label);
        }
        row.push_back(text::join(values, "; "));
      }
      const auto paper_it = paper_of_contribution.find(c);
      const std::string paper = paper_it == paper_of_contribution.end() ? "" : paper_it->second;
      row.push_back(first_object(paper, kHasTitle));
      row.push_back(text::join(objects(paper, kHasAuthor), "; "));
      row.push_back(first_object(paper, kHasMonth));
      row.push_back(first_object(paper, kHasYear));
      row.push_back(first_object(paper, kHasDoi));
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  Stats stats() const {
    Stats s;
    for (const auto& r : resources) {
      s.papers += r.classes.count(std::string(kPaperClass));
      s.contributions += r.classes.count(std::string(kContributionClass));
      s.comparisons += r.classes.count(std::string(kComparisonClass));
    }
    s.resources = resources.size();
    s.statements = statements.size();
    for (const auto& st : statements) {
      if (!predicates[*index_of(st.predicate, 'P')].reserved && has_class(st.subject, kContributionClass)) {
        ++s.cells_plain;
      }
    }
    s.cells_with_meta = s.cells_plain + 5 * s.contributions;
    return s;
  }

  std::string ntriples() const {
    std::string out;
    std::set<std::string> used;
    for (const auto& s : statements) used.insert(s.predicate);
    for (const auto& p : predicates) {
      if (!used.count(p.id)) continue;
      out += iri("predicate", p.id) + " " + std::string(kRdfsLabel) + " " + literal(p.label) + " .\n";
    }
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const Resource& r = resources[i];
      const std::string subject = iri("resource", r.id);
      out += subject + " " + std::string(kRdfsLabel) + " " + literal(r.label) + " .\n";
      for (const auto& c : r.classes) out += subject + " " + std::string(kRdfType) + " " + iri("class", c) + " .\n";
      for (std::size_t si : by_subject[i]) {
        const Statement& s = statements[si];
        out += subject + " " + iri("predicate", s.predicate) + " " +
               (s.literal ? literal(s.object) : iri("resource", s.object)) + " .\n";
      }
    }
    return out;
  }

  json to_json() const {
    json j;
    j["resources"] = json::array();
    for (const auto& r : resources) j["resources"].push_back({{"id", r.id}, {"label", r.label}, {"classes", r.classes}});
    j["predicates"] = json::array();
    for (const auto& p : predicates) {
      j["predicates"].push_back({{"id", p.id}, {"label", p.label}, {"reserved", p.reserved}});
    }
    j["statements"] = json::array();
    for (const auto& s : statements) {
      j["statements"].push_back({{"subject", s.subject}, {"predicate", s.predicate}, {"object", s.object},
                                 {"literal", s.literal}});
    }
    const Stats st = stats();
    j["stats"] = {{"papers", st.papers},         {"contributions", st.contributions},
                  {"comparisons", st.comparisons}, {"resources", st.resources},
                  {"statements", st.statements},   {"cells_plain", st.cells_plain},
                  {"cells_with_meta", st.cells_with_meta}};
    return j;
  }

  std::vector<std::string> integrity() const {
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < statements.size(); ++i) {
      const Statement& s = statements[i];
      const std::string at = "statement " + std::to_string(i) + ": ";
      if (!find(s.subject)) problems.push_back(at + "unknown subject " + s.subject);
      const auto p = index_of(s.predicate, 'P');
      if (!p || *p >= predicates.size()) problems.push_back(at + "unknown predicate " + s.predicate);
      if (!s.literal && !find(s.object)) problems.push_back(at + "unknown object " + s.object);
    }
    return problems;
  }

  // --- persistence ---

  void write_snapshot(std::ostream& os) const {
    os << kMagic << '\n';
    for (const auto& r : resources) os << json{{"r", r.id}, {"l", r.label}, {"c", r.classes}}.dump() << '\n';
    for (const auto& p : predicates) {
      if (!p.reserved) os << json{{"p", p.id}, {"l", p.label}}.dump() << '\n';
    }
    for (const auto& s : statements) {
      os << json{{"s", s.subject}, {"p", s.predicate}, {"o", s.object}, {"lit", s.literal}}.dump() << '\n';
    }
  }

  void replay_line(const std::string& line, std::size_t line_no) {
    const auto corrupt = [&](const std::string& why) {
      return Error(Errc::CorruptStore, path.string() + " line " + std::to_string(line_no) + ": " + why);
    };
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw corrupt("not a JSON object");
    try {
      if (j.contains("r")) {
        if (j["r"].get<std::string>() != rid(resources.size())) throw corrupt("resource id out of sequence");
        add_resource(j["l"].get<std::string>(), j["c"].get<std::set<std::string>>(), false);
      } else if (j.contains("s")) {
        Statement s{j["s"].get<std::string>(), j["p"].get<std::string>(), j["o"].get<std::string>(),
                    j["lit"].get<bool>()};
        if (!find(s.subject)) throw corrupt("unknown subject " + s.subject);
        const auto p = index_of(s.predicate, 'P');
        if (!p || *p >= predicates.size()) throw corrupt("unknown predicate " + s.predicate);
        if (!s.literal && !find(s.object)) throw corrupt("unknown object " + s.object);
        add_statement(s, false);
      } else if (j.contains("p")) {
        if (j["p"].get<std::string>() != pid(predicates.size())) throw corrupt("predicate id out of sequence");
        add_predicate(j["l"].get<std::string>(), false);
      } else {
        throw corrupt("unknown record");
      }
    } catch (const json::exception& e) {
      throw corrupt(e.what());
    }
  }

  void open_log() {
    log.open(path, std::ios::binary | std::ios::app);
    if (!log) throw Error(Errc::IoError, "cannot open store " + path.string() + " for writing");
  }

  void compact() {
    if (path.empty()) return;
    if (log.is_open()) log.close();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw Error(Errc::IoError, "cannot write " + tmp.string());
      write_snapshot(os);
      os.flush();
      if (!os) throw Error(Errc::IoError, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(Errc::IoError, "cannot replace " + path.string() + ": " + ec.message());
    open_log();
  }
};

GraphStore::GraphStore() : impl_(std::make_unique<Impl>()) {}
GraphStore::GraphStore(GraphStore&&) noexcept = default;
GraphStore& GraphStore::operator=(GraphStore&&) noexcept = default;
GraphStore::~GraphStore() = default;

GraphStore GraphStore::open(const std::filesystem::path& path) {
  GraphStore store;
  Impl& im = *store.impl_;
  im.path = path;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    im.compact();
    return store;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read store " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  const auto lines = text::split(content, "\n");
  if (lines.empty() || lines[0] != kMagic) {
    throw Error(Errc::CorruptStore, path.string() + " is not a surveykg store");
  }
  bool torn = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const bool last_unterminated = i + 1 == lines.size();
    try {
      im.replay_line(lines[i], i + 1);
    } catch (const Error&) {
      // an interrupted final append is dropped; anything else is corruption
      if (!last_unterminated) throw;
      torn = true;
    }
  }
  if (torn || (!content.empty() && content.back() != '\n')) {
    im.compact();
  } else {
    im.open_log();
  }
  return store;
}

Resource GraphStore::lookup_or_create_resource(std::string_view label, std::optional<std::string_view> cls) {
  std::unique_lock lock(impl_->mu);
  Resource r = impl_->lookup_or_create(label, cls);
  impl_->flush();
  return r;
}

Predicate GraphStore::lookup_or_create_predicate(std::string_view label) {
  std::unique_lock lock(impl_->mu);
  Predicate p = impl_->lookup_or_create_predicate(label);
  impl_->flush();
  return p;
}

std::string GraphStore::create_comparison(const SettingsEntry& entry) {
  std::unique_lock lock(impl_->mu);
  std::string id = impl_->create_comparison(entry);
  impl_->flush();
  return id;
}

std::string GraphStore::ingest_row(const format::SurveyTable& table, std::size_t row, const std::string& comparison) {
  std::unique_lock lock(impl_->mu);
  std::string id = impl_->ingest_row(table, row, comparison);
  impl_->flush();
  return id;
}

std::vector<std::string> GraphStore::ingest_table(const format::SurveyTable& table, const std::string& comparison) {
  std::unique_lock lock(impl_->mu);
  std::vector<std::string> out;
  for (std::size_t r = 0; r < table.n_rows(); ++r) out.push_back(impl_->ingest_row(table, r, comparison));
  impl_->flush();
  return out;
}

format::SurveyTable GraphStore::render_comparison(const std::string& comparison) const {
  std::shared_lock lock(impl_->mu);
  return impl_->render(comparison);
}

std::vector<Resource> GraphStore::resources() const {
  std::shared_lock lock(impl_->mu);
  return impl_->resources;
}

std::vector<Predicate> GraphStore::predicates() const {
  std::shared_lock lock(impl_->mu);
  return impl_->predicates;
}

std::vector<Statement> GraphStore::statements() const {
  std::shared_lock lock(impl_->mu);
  return impl_->statements;
}

std::vector<std::string> GraphStore::comparisons() const {
  std::shared_lock lock(impl_->mu);
  std::vector<std::string> out;
  for (const auto& r : impl_->resources) {
    if (r.classes.count(std::string(kComparisonClass))) out.push_back(r.id);
  }
  return out;
}

std::vector<std::string> GraphStore::papers() const {
  std::shared_lock lock(impl_->mu);
  std::vector<std::string> out;
  for (const auto& r : impl_->resources) {
    if (r.classes.count(std::string(kPaperClass))) out.push_back(r.id);
  }
  return out;
}

std::vector<std::string> GraphStore::contributions_of(const std::string& comparison) const {
  std::shared_lock lock(impl_->mu);
  if (!impl_->has_class(comparison, kComparisonClass)) {
    throw Error(Errc::UnknownComparison, "no comparison with id '" + comparison + "'");
  }
  const auto it = impl_->comparison_contributions.find(comparison);
  return it == impl_->comparison_contributions.end() ? std::vector<std::string>{} : it->second;
}

std::optional<Resource> GraphStore::resource(const std::string& id) const {
  std::shared_lock lock(impl_->mu);
  const Resource* r = impl_->find(id);
  if (!r) return std::nullopt;
  return *r;
}

Stats GraphStore::stats() const {
  std::shared_lock lock(impl_->mu);
  return impl_->stats();
}

std::string GraphStore::export_ntriples() const {
  std::shared_lock lock(impl_->mu);
  return impl_->ntriples();
}

std::string GraphStore::export_json() const {
  std::shared_lock lock(impl_->mu);
  return impl_->to_json().dump(2) + "\n";
}

std::vector<std::string> GraphStore::check_integrity() const {
  std::shared_lock lock(impl_->mu);
  return impl_->integrity();
}

void GraphStore::compact() {
  std::unique_lock lock(impl_->mu);
  impl_->compact();
}

void GraphStore::close() {
  std::unique_lock lock(impl_->mu);
  if (impl_->log.is_open()) {
    impl_->flush();
    impl_->log.close();
  }
  impl_->path.clear();
}

}  // namespace surveykg::graph
