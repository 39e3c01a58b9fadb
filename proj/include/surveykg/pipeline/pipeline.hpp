#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surveykg/error.hpp"
#include "surveykg/extract/extract.hpp"
#include "surveykg/format/table.hpp"
#include "surveykg/layout/types.hpp"
#include "surveykg/refs/metadata.hpp"
#include "surveykg/refs/refs.hpp"

namespace surveykg::pipeline {

// ---- linking shared by the batch pipeline and the service ----

/// Reference-list entries of an article; empty when it has no reference
/// section.
std::vector<refs::BibEntry> reference_entries(const layout::Document& doc);

/// Fills absent fields from the metadata client when the entry has a title
/// or DOI. A null client leaves the entry as is. Throws ServiceUnavailable.
refs::BibEntry complete_entry(const refs::BibEntry& entry, refs::MetadataClient* client);

/// Links every row and completes the linked entries.
std::vector<refs::LinkResult> auto_link(const format::SurveyTable& table, const std::vector<refs::BibEntry>& entries,
                                        refs::MetadataClient* client);

/// A pasted citation: parsed, given a generated key when possible, completed.
refs::BibEntry manual_entry(std::string_view citation, refs::MetadataClient* client);

/// Reads one citation from `in` after writing a prompt naming `context`.
/// Blank lines are skipped. Throws Error{AbortedByUser} at end of input.
refs::BibEntry prompt_manual_citation(std::string_view context, std::istream& in, std::ostream& out,
                                      refs::MetadataClient* client = nullptr);

/// SURVEYKG_METADATA_RECORDS names a local record file (offline mock);
/// otherwise SURVEYKG_METADATA_URL selects a Crossref-compatible service
/// unless SURVEYKG_OFFLINE is set. Returns null when no source is configured.
std::unique_ptr<refs::MetadataClient> metadata_client_from_env();

// ---- workspace ----

struct TableSpec {
  std::string article;
  std::string id;
  extract::Method method = extract::Method::Lattice;
  std::vector<layout::Region> regions;

  std::string key() const { return article + "/" + id; }
  bool operator==(const TableSpec&) const = default;
};

/// tables.txt: one table per line, "<id> <lattice|stream> <region>...",
/// '#' comments. Throws Error{UsageError, InvalidRegion}.
std::vector<TableSpec> parse_tables_file(std::string_view article, std::string_view content);

struct Resolution {
  std::string table;  // "<article>/<table id>"
  std::size_t row = 0;
  std::string citation;

  bool operator==(const Resolution&) const = default;
};

/// resolutions.tsv: "<table>\t<row>\t<citation>" lines, '#' comments.
std::vector<Resolution> parse_resolutions(std::string_view content);
std::string render_resolution(const Resolution& r);

struct ItemError {
  std::string item;
  Errc code = Errc::UsageError;
  std::string message;
};

struct StageReport {
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::size_t prompts = 0;
  std::vector<ItemError> errors;
};

struct RunOptions {
  bool fail_fast = false;
  bool force = false;                        // redo items whose artifacts exist
  refs::MetadataClient* metadata = nullptr;  // null: no lookups
  std::istream* prompt_in = nullptr;         // null: no interactive prompts
  std::ostream* prompt_out = nullptr;
  std::optional<std::filesystem::path> resolutions;  // default: <root>/resolutions.tsv
  std::optional<std::filesystem::path> settings;     // default: <root>/settings.json
};

struct StatsReport {
  std::size_t evaluated = 0;
  std::size_t extracted_tables = 0;
  std::size_t extraction_parts = 0;
  std::size_t linked_refs = 0;    // linked automatically
  std::size_t unlinked_refs = 0;  // needed a manual citation
  std::size_t papers = 0;
  std::size_t comparisons = 0;
  std::size_t cells_plain = 0;
  std::size_t cells_with_meta = 0;

  bool operator==(const StatsReport&) const = default;
};

/// "name\tvalue" lines in field order.
std::string render_stats(const StatsReport& s);

/// Directory layout:
///   articles/<article>/article.pdf, tables.txt
///   articles/<article>/extracted/<t>.csv, <t>.issues.tsv
///   articles/<article>/edits/<t>.edits            (optional)
///   articles/<article>/formatted/<t>.csv
///   articles/<article>/linked/<t>.csv, <t>.links.json
///   resolutions.tsv, settings.json, graph/store.log
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::vector<std::string> articles() const;
  std::vector<TableSpec> tables() const;

  std::filesystem::path article_dir(const std::string& article) const;
  std::filesystem::path pdf_path(const std::string& article) const;
  std::filesystem::path extracted_path(const TableSpec& t) const;
  std::filesystem::path issues_path(const TableSpec& t) const;
  std::filesystem::path edits_path(const TableSpec& t) const;
  std::filesystem::path formatted_path(const TableSpec& t) const;
  std::filesystem::path linked_path(const TableSpec& t) const;
  std::filesystem::path links_path(const TableSpec& t) const;
  std::filesystem::path resolutions_path() const;
  std::filesystem::path settings_path() const;
  std::filesystem::path store_path() const;

  StageReport extract(const RunOptions& options) const;
  StageReport format(const RunOptions& options) const;
  StageReport refs(const RunOptions& options) const;
  /// Rebuilds the graph from settings.json and the linked tables.
  StageReport build(const RunOptions& options) const;

  StatsReport stats() const;
  /// "nt" or "json". Throws Error{IoError} without a graph.
  std::string export_graph(std::string_view format) const;

 private:
  std::filesystem::path root_;
};

/// Extracts one table from the regions of a loaded document.
extract::TableGrid extract_regions(const layout::Document& doc, const std::vector<layout::Region>& regions,
                                   extract::Method method);

}  // namespace surveykg::pipeline
