#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "surveykg/refs/refs.hpp"

namespace surveykg::refs {

struct MetadataRecord {
  std::string doi;
  std::string title;
  std::vector<std::string> authors;  // "Family, Given"
  std::optional<int> year;
  std::optional<int> month;

  bool operator==(const MetadataRecord&) const = default;
};

/// Scholarly metadata source. Implementations throw
/// Error{ServiceUnavailable} when the backend cannot be reached.
class MetadataClient {
 public:
  virtual ~MetadataClient() = default;
  virtual std::optional<MetadataRecord> by_doi(const std::string& doi) = 0;
  /// Candidate records for a free-text title query, best first.
  virtual std::vector<MetadataRecord> search_title(const std::string& title, int rows) = 0;
};

/// Offline client over a local record file: one record per line,
/// tab-separated doi, title, authors ("; "-joined), year, month; '#'
/// comments.
class MockMetadataClient : public MetadataClient {
 public:
  explicit MockMetadataClient(std::vector<MetadataRecord> records);
  static MockMetadataClient from_file(const std::filesystem::path& path);
  static std::vector<MetadataRecord> parse_records(std::string_view text);

  std::optional<MetadataRecord> by_doi(const std::string& doi) override;
  std::vector<MetadataRecord> search_title(const std::string& title, int rows) override;

  const std::vector<MetadataRecord>& records() const { return records_; }
  /// Queries answered so far (by DOI or title).
  int query_count() const { return queries_; }
  /// Makes every following query fail with ServiceUnavailable.
  void set_unavailable(bool on) { unavailable_ = on; }

 private:
  std::vector<MetadataRecord> records_;
  int queries_ = 0;
  bool unavailable_ = false;
};

/// Client for a Crossref-compatible REST API: GET {base}/works/{doi} and
/// GET {base}/works?query.bibliographic=...&rows=n, each answering with the
/// {"status": "ok", "message": ...} envelope. Outbound requests are
/// serialized and spaced by min_interval.
class CrossrefClient : public MetadataClient {
 public:
  explicit CrossrefClient(std::string base_url,
                          std::chrono::milliseconds min_interval = std::chrono::milliseconds(1000));

  std::optional<MetadataRecord> by_doi(const std::string& doi) override;
  std::vector<MetadataRecord> search_title(const std::string& title, int rows) override;

  /// Parses one "work" object of the envelope's message.
  static std::optional<MetadataRecord> parse_work(const std::string& json_text);

 private:
  std::string get(const std::string& path_and_query, bool& not_found);

  std::string scheme_host_;
  std::string base_path_;
  std::chrono::milliseconds min_interval_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

inline constexpr double kTitleSimilarityThreshold = 0.85;

enum class LookupStatus { Completed, AlreadyComplete, NoMatch };

struct LookupOutcome {
  BibEntry entry;
  LookupStatus status = LookupStatus::NoMatch;
};

/// Fills absent title, authors, year, month and DOI from the best match (by
/// DOI, else title similarity >= kTitleSimilarityThreshold). Present fields
/// are never changed.
LookupOutcome lookup_metadata(const BibEntry& entry, MetadataClient& client);

bool is_complete(const BibEntry& entry);

}  // namespace surveykg::refs
