#include "surveykg/refs/metadata.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "surveykg/error.hpp"
#include "surveykg/text.hpp"

namespace surveykg::refs {

namespace {

using nlohmann::json;

std::string doi_key(std::string_view doi) { return text::casefold(text::trim(doi)); }

std::optional<int> parse_int_field(const std::string& s, int lo, int hi) {
  const std::string t = text::trim(s);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used == t.size() && v >= lo && v <= hi) return v;
  } catch (...) {
  }
  return std::nullopt;
}

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

}  // namespace

MockMetadataClient::MockMetadataClient(std::vector<MetadataRecord> records) : records_(std::move(records)) {}

std::vector<MetadataRecord> MockMetadataClient::parse_records(std::string_view content) {
  std::vector<MetadataRecord> out;
  std::size_t line_no = 0;
  for (std::string line : text::split(content, "\n")) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || text::trim(line)[0] == '#') continue;
    const auto f = text::split(line, "\t");
    if (f.size() < 2 || f.size() > 5 || text::trim(f[0]).empty()) {
      throw Error(Errc::IoError, "metadata record line " + std::to_string(line_no) + ": expected doi, title, authors, year, month");
    }
    MetadataRecord r;
    r.doi = text::trim(f[0]);
    r.title = text::nfc(text::trim(f[1]));
    if (f.size() > 2) {
      for (const auto& a : text::split(f[2], ";")) {
        if (!text::trim(a).empty()) r.authors.push_back(text::nfc(text::trim(a)));
      }
    }
    if (f.size() > 3) r.year = parse_int_field(f[3], 1000, 2999);
    if (f.size() > 4) r.month = parse_int_field(f[4], 1, 12);
    out.push_back(std::move(r));
  }
  return out;
}

MockMetadataClient MockMetadataClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read metadata records " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return MockMetadataClient(parse_records(ss.str()));
}

std::optional<MetadataRecord> MockMetadataClient::by_doi(const std::string& doi) {
  if (unavailable_) throw Error(Errc::ServiceUnavailable, "mock metadata service is unavailable");
  ++queries_;
  for (const auto& r : records_) {
    if (doi_key(r.doi) == doi_key(doi)) return r;
  }
  return std::nullopt;
}

std::vector<MetadataRecord> MockMetadataClient::search_title(const std::string& title, int rows) {
  if (unavailable_) throw Error(Errc::ServiceUnavailable, "mock metadata service is unavailable");
  ++queries_;
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const double s = title_similarity(title, records_[i].title);
    if (s > 0) scored.emplace_back(s, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<MetadataRecord> out;
  for (const auto& [s, i] : scored) {
    if (static_cast<int>(out.size()) >= rows) break;
    out.push_back(records_[i]);
  }
  return out;
}

CrossrefClient::CrossrefClient(std::string base_url, std::chrono::milliseconds min_interval)
    : min_interval_(min_interval) {
  const auto scheme = base_url.find("://");
  const auto path_start = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = base_url;
  } else {
    scheme_host_ = base_url.substr(0, path_start);
    base_path_ = base_url.substr(path_start);
  }
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string CrossrefClient::get(const std::string& path_and_query, bool& not_found) {
  std::lock_guard lock(mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (last_request_ != std::chrono::steady_clock::time_point{} && now - last_request_ < min_interval_) {
    std::this_thread::sleep_for(min_interval_ - (now - last_request_));
  }
  last_request_ = std::chrono::steady_clock::now();
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(5);
  client.set_read_timeout(15);
  client.set_follow_location(true);
  client.set_default_headers({{"User-Agent", "surveykg/1.0"}});
  const std::string target = base_path_ + path_and_query;
  auto res = client.Get(target);
  if (!res) {
    throw Error(Errc::ServiceUnavailable,
                "metadata service " + scheme_host_ + " unreachable: " + httplib::to_string(res.error()));
  }
  not_found = res->status == 404;
  if (not_found) return "";
  if (res->status != 200) {
    throw Error(Errc::ServiceUnavailable, "metadata service answered HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::optional<MetadataRecord> CrossrefClient::parse_work(const std::string& json_text) {
  const json work = json::parse(json_text, nullptr, false);
  if (work.is_discarded() || !work.is_object()) return std::nullopt;
  MetadataRecord r;
  if (work.contains("DOI") && work["DOI"].is_string()) r.doi = work["DOI"].get<std::string>();
  if (work.contains("title")) {
    const auto& t = work["title"];
    if (t.is_array() && !t.empty() && t[0].is_string()) {
      r.title = t[0].get<std::string>();
    } else if (t.is_string()) {
      r.title = t.get<std::string>();
    }
  }
  r.title = text::nfc(text::collapse_whitespace(text::trim(r.title)));
  if (work.contains("author") && work["author"].is_array()) {
    for (const auto& a : work["author"]) {
      const std::string family = a.value("family", std::string());
      const std::string given = a.value("given", std::string());
      const std::string name = a.value("name", std::string());
      if (!family.empty()) {
        r.authors.push_back(text::nfc(given.empty() ? family : family + ", " + given));
      } else if (!name.empty()) {
        r.authors.push_back(text::nfc(name));
      }
    }
  }
  for (const char* field : {"issued", "published-print", "published-online", "published"}) {
    if (!work.contains(field)) continue;
    const auto& dp = (*work.find(field))["date-parts"];
    if (!dp.is_array() || dp.empty() || !dp[0].is_array() || dp[0].empty()) continue;
    if (dp[0][0].is_number_integer()) r.year = dp[0][0].get<int>();
    if (dp[0].size() > 1 && dp[0][1].is_number_integer()) {
      const int m = dp[0][1].get<int>();
      if (m >= 1 && m <= 12) r.month = m;
    }
    if (r.year) break;
  }
  if (r.doi.empty() && r.title.empty()) return std::nullopt;
  return r;
}

std::optional<MetadataRecord> CrossrefClient::by_doi(const std::string& doi) {
  bool not_found = false;
  const std::string body = get("/works/" + url_encode(text::trim(doi)), not_found);
  if (not_found) return std::nullopt;
  const json env = json::parse(body, nullptr, false);
  if (env.is_discarded() || !env.contains("message")) {
    throw Error(Errc::ServiceUnavailable, "malformed metadata response for " + doi);
  }
  return parse_work(env["message"].dump());
}

std::vector<MetadataRecord> CrossrefClient::search_title(const std::string& title, int rows) {
  bool not_found = false;
  const std::string body =
      get("/works?query.bibliographic=" + url_encode(title) + "&rows=" + std::to_string(rows), not_found);
  std::vector<MetadataRecord> out;
  if (not_found) return out;
  const json env = json::parse(body, nullptr, false);
  if (env.is_discarded() || !env.contains("message")) {
    throw Error(Errc::ServiceUnavailable, "malformed metadata search response");
  }
  const auto& msg = env["message"];
  if (!msg.contains("items") || !msg["items"].is_array()) return out;
  for (const auto& item : msg["items"]) {
    if (auto r = parse_work(item.dump())) out.push_back(std::move(*r));
  }
  return out;
}

bool is_complete(const BibEntry& entry) {
  return entry.title && !entry.authors.empty() && entry.year && entry.month && entry.doi;
}

LookupOutcome lookup_metadata(const BibEntry& entry, MetadataClient& client) {
  if (is_complete(entry)) return {entry, LookupStatus::AlreadyComplete};
  std::optional<MetadataRecord> match;
  if (entry.doi) match = client.by_doi(*entry.doi);
  if (!match && entry.title) {
    double best = 0;
    for (auto& candidate : client.search_title(*entry.title, 5)) {
      const double s = title_similarity(*entry.title, candidate.title);
      if (s >= kTitleSimilarityThreshold && s > best) {
        best = s;
        match = std::move(candidate);
      }
    }
  }
  if (!match) return {entry, LookupStatus::NoMatch};
  BibEntry out = entry;
  if (!out.title && !match->title.empty()) out.title = match->title;
  if (out.authors.empty()) out.authors = match->authors;
  if (!out.year) out.year = match->year;
  if (!out.month) out.month = match->month;
  if (!out.doi && !match->doi.empty()) out.doi = match->doi;
  return {out, LookupStatus::Completed};
}

}  // namespace surveykg::refs
