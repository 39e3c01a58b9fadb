#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "surveykg/graph/store.hpp"
#include "surveykg/refs/metadata.hpp"

namespace httplib {
class Server;
}

namespace surveykg::service {

enum class Step { Upload, SelectRegion, EditTable, ResolveRefs, Ingest, Done };

std::string_view step_name(Step s);

inline constexpr std::string_view kBasePath = "/api/v1";
inline constexpr std::size_t kMaxUploadBytes = 50u * 1024 * 1024;
inline constexpr std::chrono::seconds kIdleTtl{3600};

struct ServiceOptions {
  /// Graph store file; in-memory when absent.
  std::optional<std::filesystem::path> store_path;
  /// Lookup client for reference completion; null disables lookups. Not owned.
  refs::MetadataClient* metadata = nullptr;
  /// Records served by the built-in Crossref-compatible endpoints under
  /// /api/v1/metadata; those endpoints answer 404 when empty.
  std::vector<refs::MetadataRecord> mock_records;
  std::string cors_origin = "*";
  std::chrono::seconds idle_ttl = kIdleTtl;
};

/// Stateful import sessions over one graph store. Routes are registered on
/// an httplib server by mount(); everything is served under kBasePath.
///
/// Endpoints (JSON bodies):
///   POST   /sessions                      PDF as multipart field "file" or raw body -> 201 {id, step, pages}
///   GET    /sessions/{id}                 {id, step, pages, grid, table, links}
///   DELETE /sessions/{id}                 204
///   GET    /sessions/{id}/pages/{n}       {index, width, height, words[], rulings[]}
///   POST   /sessions/{id}/extract         {region, mode} -> {grid, issues}
///   PUT    /sessions/{id}/table           {edits} -> {table, violations, links, step}
///   POST   /sessions/{id}/refs/resolve    {row, citation_text} -> {link, step}
///   POST   /sessions/{id}/ingest          {table_id, title, source_reference} -> {comparison_id, paper_ids, contribution_ids}
///   GET    /graph/export?format=nt|json
///   GET    /graph/comparisons/{id}        rendered table
///   GET    /stats
///   GET    /metadata/works/{doi}, /metadata/works?query.bibliographic=&rows=
///
/// Errors answer {error, message[, violations]}: 400 malformed request,
/// 404 unknown session or resource, 409 step-order violation, 422 validation
/// or extraction failure, 502 metadata service failure.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  /// Drops sessions idle since before now - idle_ttl. Returns the count.
  std::size_t evict_idle(std::chrono::steady_clock::time_point now);
  std::size_t session_count() const;

  /// The shared store; callers must not write while requests are served.
  const graph::GraphStore& store() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surveykg::service
