#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "surveykg/csv.hpp"
#include "surveykg/format/edits.hpp"
#include "surveykg/graph/store.hpp"
#include "surveykg/layout/layout.hpp"
#include "surveykg/pipeline/pipeline.hpp"
#include "surveykg/text.hpp"

namespace surveykg::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file so an artifact is either complete or absent.
void write_atomic(const fs::path& p, std::string_view data) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << data;
    out.flush();
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(Errc::IoError, "cannot write " + p.string() + ": " + ec.message());
}

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return text::collapse_whitespace(text::trim(out));
}

std::string describe(const std::vector<format::Violation>& violations) {
  std::vector<std::string> parts;
  for (const auto& v : violations) {
    std::string p = "rule " + std::to_string(v.rule);
    if (v.row) p += " row " + std::to_string(*v.row);
    if (v.column) p += " column " + std::to_string(*v.column);
    parts.push_back(p + ": " + v.message);
  }
  return text::join(parts, "; ");
}

/// Runs `fn` for one item, turning errors into report entries. Returns false
/// when the stage must stop.
template <typename Fn>
bool guarded(StageReport& report, const RunOptions& options, const std::string& item, Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error& e) {
    report.errors.push_back({item, e.code(), e.what()});
  } catch (const std::filesystem::filesystem_error& e) {
    report.errors.push_back({item, Errc::IoError, e.what()});
  }
  return !options.fail_fast;
}

/// Table specs of every article; a malformed tables.txt is an item error.
std::vector<TableSpec> collect(const Workspace& ws, StageReport& report, const RunOptions& options, bool& stop) {
  std::vector<TableSpec> out;
  stop = false;
  for (const auto& a : ws.articles()) {
    const fs::path file = ws.article_dir(a) / "tables.txt";
    if (!fs::exists(file)) continue;
    if (!guarded(report, options, a, [&] {
          for (auto& t : parse_tables_file(a, read_text(file))) out.push_back(std::move(t));
        })) {
      stop = true;
      break;
    }
  }
  return out;
}

std::vector<Resolution> load_resolutions(const fs::path& p) {
  if (!fs::exists(p)) return {};
  return parse_resolutions(read_text(p));
}

}  // namespace

std::vector<TableSpec> parse_tables_file(std::string_view article, std::string_view content) {
  std::vector<TableSpec> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string line : text::split(content, "\n")) {
    ++line_no;
    line = text::collapse_whitespace(text::trim(line));
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::split(line, " ");
    const std::string at = "tables.txt line " + std::to_string(line_no) + ": ";
    if (fields.size() < 3) throw Error(Errc::UsageError, at + "expected '<id> <lattice|stream> <region>...'");
    TableSpec t;
    t.article = std::string(article);
    t.id = fields[0];
    if (t.id.find('/') != std::string::npos) throw Error(Errc::UsageError, at + "table id must not contain '/'");
    if (!ids.insert(t.id).second) throw Error(Errc::UsageError, at + "duplicate table id " + t.id);
    try {
      t.method = extract::parse_method(fields[1]);
    } catch (const Error& e) {
      throw Error(Errc::UsageError, at + e.what());
    }
    for (std::size_t i = 2; i < fields.size(); ++i) {
      try {
        t.regions.push_back(layout::parse_region(fields[i]));
      } catch (const Error& e) {
        throw Error(e.code(), at + e.what());
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Resolution> parse_resolutions(std::string_view content) {
  std::vector<Resolution> out;
  std::size_t line_no = 0;
  for (std::string line : text::split(content, "\n")) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || text::trim(line)[0] == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    const std::string at = "resolutions line " + std::to_string(line_no) + ": ";
    if (tab2 == std::string::npos) throw Error(Errc::UsageError, at + "expected '<table>\\t<row>\\t<citation>'");
    Resolution r;
    r.table = text::trim(line.substr(0, tab1));
    const std::string row = text::trim(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (row.empty() || !std::all_of(row.begin(), row.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw Error(Errc::UsageError, at + "row must be a non-negative integer");
    }
    r.row = std::stoul(row);
    r.citation = text::trim(line.substr(tab2 + 1));
    if (r.citation.empty()) throw Error(Errc::UsageError, at + "empty citation");
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_resolution(const Resolution& r) {
  return r.table + "\t" + std::to_string(r.row) + "\t" + one_line(r.citation) + "\n";
}

std::string render_stats(const StatsReport& s) {
  std::ostringstream os;
  os << "evaluated\t" << s.evaluated << "\n"
     << "extracted_tables\t" << s.extracted_tables << "\n"
     << "extraction_parts\t" << s.extraction_parts << "\n"
     << "linked_refs\t" << s.linked_refs << "\n"
     << "unlinked_refs\t" << s.unlinked_refs << "\n"
     << "papers\t" << s.papers << "\n"
     << "comparisons\t" << s.comparisons << "\n"
     << "cells_plain\t" << s.cells_plain << "\n"
     << "cells_with_meta\t" << s.cells_with_meta << "\n";
  return os.str();
}

extract::TableGrid extract_regions(const layout::Document& doc, const std::vector<layout::Region>& regions,
                                   extract::Method method) {
  if (regions.empty()) throw Error(Errc::InvalidRegion, "no region given");
  std::vector<extract::TableGrid> parts;
  for (const auto& r : regions) parts.push_back(extract::extract_table(layout::page_for(doc, r), r, method));
  return parts.size() == 1 ? parts.front() : extract::merge_multipage(parts);
}

Workspace::Workspace(fs::path root) : root_(std::move(root)) {}

std::vector<std::string> Workspace::articles() const {
  std::vector<std::string> out;
  const fs::path dir = root_ / "articles";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TableSpec> Workspace::tables() const {
  std::vector<TableSpec> out;
  for (const auto& a : articles()) {
    const fs::path file = article_dir(a) / "tables.txt";
    if (!fs::exists(file)) continue;
    for (auto& t : parse_tables_file(a, read_text(file))) out.push_back(std::move(t));
  }
  return out;
}

fs::path Workspace::article_dir(const std::string& article) const { return root_ / "articles" / article; }
fs::path Workspace::pdf_path(const std::string& article) const { return article_dir(article) / "article.pdf"; }
fs::path Workspace::extracted_path(const TableSpec& t) const {
  return article_dir(t.article) / "extracted" / (t.id + ".csv");
}
fs::path Workspace::issues_path(const TableSpec& t) const {
  return article_dir(t.article) / "extracted" / (t.id + ".issues.tsv");
}
fs::path Workspace::edits_path(const TableSpec& t) const {
  return article_dir(t.article) / "edits" / (t.id + ".edits");
}
fs::path Workspace::formatted_path(const TableSpec& t) const {
  return article_dir(t.article) / "formatted" / (t.id + ".csv");
}
fs::path Workspace::linked_path(const TableSpec& t) const {
  return article_dir(t.article) / "linked" / (t.id + ".csv");
}
fs::path Workspace::links_path(const TableSpec& t) const {
  return article_dir(t.article) / "linked" / (t.id + ".links.json");
}
fs::path Workspace::resolutions_path() const { return root_ / "resolutions.tsv"; }
fs::path Workspace::settings_path() const { return root_ / "settings.json"; }
fs::path Workspace::store_path() const { return root_ / "graph" / "store.log"; }

StageReport Workspace::extract(const RunOptions& options) const {
  StageReport report;
  bool stop = false;
  const auto specs = collect(*this, report, options, stop);
  std::map<std::string, layout::Document> docs;
  for (const auto& t : specs) {
    if (stop) break;
    if (fs::exists(extracted_path(t)) && !options.force) {
      ++report.skipped;
      continue;
    }
    stop = !guarded(report, options, t.key(), [&] {
      auto it = docs.find(t.article);
      if (it == docs.end()) it = docs.emplace(t.article, layout::load_document(pdf_path(t.article))).first;
      const extract::TableGrid grid = extract_regions(it->second, t.regions, t.method);
      std::string issues = "kind\trow\tcolumn\tnote\n";
      for (const auto& i : extract::diagnose(grid)) {
        issues += std::string(extract::issue_kind_name(i.kind)) + "\t" + std::to_string(i.row) + "\t" +
                  std::to_string(i.column) + "\t" + one_line(i.note) + "\n";
      }
      write_atomic(issues_path(t), issues);
      write_atomic(extracted_path(t), extract::grid_to_csv(grid));
      ++report.processed;
    });
  }
  return report;
}

StageReport Workspace::format(const RunOptions& options) const {
  StageReport report;
  bool stop = false;
  const auto specs = collect(*this, report, options, stop);
  for (const auto& t : specs) {
    if (stop) break;
    if (!fs::exists(extracted_path(t))) continue;
    if (fs::exists(formatted_path(t)) && !options.force) {
      ++report.skipped;
      continue;
    }
    stop = !guarded(report, options, t.key(), [&] {
      const auto records = csv::parse(read_text(extracted_path(t)));
      format::SurveyTable table = format::from_grid(extract::grid_from_texts(records));
      if (fs::exists(edits_path(t))) table = format::apply_edit_script(table, read_text(edits_path(t)));
      const auto violations = format::validate(table);
      if (!violations.empty()) throw Error(Errc::RuleViolations, describe(violations));
      fs::create_directories(formatted_path(t).parent_path());
      format::write_csv(table, formatted_path(t));
      ++report.processed;
    });
  }
  return report;
}

StageReport Workspace::refs(const RunOptions& options) const {
  StageReport report;
  bool stop = false;
  const auto specs = collect(*this, report, options, stop);
  const fs::path resolutions_file = options.resolutions.value_or(resolutions_path());
  std::vector<Resolution> resolutions;
  if (!stop) {
    stop = !guarded(report, options, resolutions_file.filename().string(),
                    [&] { resolutions = load_resolutions(resolutions_file); });
  }
  std::map<std::string, std::vector<refs::BibEntry>> entries_of;
  for (const auto& t : specs) {
    if (stop) break;
    if (!fs::exists(formatted_path(t))) continue;
    if (fs::exists(linked_path(t)) && !options.force) {
      ++report.skipped;
      continue;
    }
    stop = !guarded(report, options, t.key(), [&] {
      const format::SurveyTable table = format::read_csv(formatted_path(t));
      auto it = entries_of.find(t.article);
      if (it == entries_of.end()) {
        it = entries_of.emplace(t.article, reference_entries(layout::load_document(pdf_path(t.article)))).first;
      }
      auto links = auto_link(table, it->second, options.metadata);
      std::vector<bool> automatic;
      for (const auto& l : links) automatic.push_back(l.linked());
      for (auto& l : links) {
        if (l.linked()) continue;
        const std::size_t row = static_cast<std::size_t>(l.row_index);
        const auto res = std::find_if(resolutions.rbegin(), resolutions.rend(),
                                      [&](const Resolution& r) { return r.table == t.key() && r.row == row; });
        if (res != resolutions.rend()) {
          l.entry = manual_entry(res->citation, options.metadata);
          continue;
        }
        if (!options.prompt_in || !options.prompt_out) continue;
        ++report.prompts;
        const std::string context =
            "Table " + t.key() + ", row " + std::to_string(row) + ": no reference found for key '" + l.key_text + "'.";
        try {
          refs::BibEntry e = prompt_manual_citation(context, *options.prompt_in, *options.prompt_out, nullptr);
          const Resolution r{t.key(), row, e.raw};
          std::ofstream out(resolutions_file, std::ios::binary | std::ios::app);
          out << render_resolution(r);
          if (!out) throw Error(Errc::IoError, "cannot append to " + resolutions_file.string());
          resolutions.push_back(r);
          l.entry = complete_entry(e, options.metadata);
        } catch (const Error& e) {
          if (e.code() != Errc::AbortedByUser) throw;
        }
      }
      const format::SurveyTable linked = refs::append_metadata_columns(table, links);
      nlohmann::ordered_json j;
      j["table"] = t.key();
      j["rows"] = nlohmann::ordered_json::array();
      for (std::size_t r = 0; r < links.size(); ++r) {
        nlohmann::ordered_json row;
        row["row"] = r;
        row["key"] = links[r].key_text;
        row["automatic"] = static_cast<bool>(automatic[r]);
        row["citation"] = links[r].entry->raw;
        if (links[r].entry->key) row["entry_key"] = refs::render_key(*links[r].entry->key);
        j["rows"].push_back(row);
      }
      fs::create_directories(linked_path(t).parent_path());
      format::write_csv(linked, linked_path(t));
      write_atomic(links_path(t), j.dump(2) + "\n");
      ++report.processed;
    });
  }
  return report;
}

StageReport Workspace::build(const RunOptions& options) const {
  StageReport report;
  const fs::path settings_file = options.settings.value_or(settings_path());
  std::vector<graph::SettingsEntry> settings;
  if (!guarded(report, options, settings_file.filename().string(),
               [&] { settings = graph::read_settings(settings_file); }) ||
      !report.errors.empty()) {
    return report;
  }
  bool stop = false;
  const auto specs = collect(*this, report, options, stop);
  if (stop) return report;
  std::map<std::string, TableSpec> by_key;
  for (const auto& t : specs) by_key.emplace(t.key(), t);

  const fs::path building = store_path().string() + ".building";
  fs::remove(building);
  {
    graph::GraphStore store = graph::GraphStore::open(building);
    for (const auto& entry : settings) {
      if (stop) break;
      stop = !guarded(report, options, entry.table_id, [&] {
        const auto it = by_key.find(entry.table_id);
        if (it == by_key.end()) throw Error(Errc::SettingsError, "no table '" + entry.table_id + "' in the workspace");
        if (!fs::exists(linked_path(it->second))) {
          throw Error(Errc::UnresolvedReference, "table '" + entry.table_id + "' has not been linked yet");
        }
        const format::SurveyTable table = format::read_csv(linked_path(it->second));
        const std::string comparison = store.create_comparison(entry);
        store.ingest_table(table, comparison);
        ++report.processed;
      });
    }
    store.close();
  }
  std::error_code ec;
  fs::rename(building, store_path(), ec);
  if (ec) report.errors.push_back({"graph", Errc::IoError, "cannot replace " + store_path().string() + ": " + ec.message()});
  return report;
}

StatsReport Workspace::stats() const {
  StatsReport s;
  s.evaluated = articles().size();
  for (const auto& t : tables()) {
    if (fs::exists(extracted_path(t))) {
      ++s.extracted_tables;
      s.extraction_parts += t.regions.size();
    }
    if (fs::exists(links_path(t))) {
      const auto j = nlohmann::json::parse(read_text(links_path(t)), nullptr, false);
      if (j.is_discarded() || !j.contains("rows")) throw Error(Errc::IoError, "malformed " + links_path(t).string());
      for (const auto& row : j["rows"]) (row.value("automatic", false) ? s.linked_refs : s.unlinked_refs)++;
    }
  }
  if (fs::exists(store_path())) {
    const graph::GraphStore store = graph::GraphStore::open(store_path());
    const graph::Stats g = store.stats();
    s.papers = g.papers;
    s.comparisons = g.comparisons;
    s.cells_plain = g.cells_plain;
    s.cells_with_meta = g.cells_with_meta;
  }
  return s;
}

std::string Workspace::export_graph(std::string_view format) const {
  if (!fs::exists(store_path())) throw Error(Errc::IoError, "no graph yet; run build first");
  const graph::GraphStore store = graph::GraphStore::open(store_path());
  if (format == "nt") return store.export_ntriples();
  if (format == "json") return store.export_json();
  throw Error(Errc::UsageError, "unknown export format '" + std::string(format) + "' (nt or json)");
}

}  // namespace surveykg::pipeline
