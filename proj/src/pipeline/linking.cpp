#include <cstdlib>
#include <istream>
#include <ostream>

#include "surveykg/pipeline/pipeline.hpp"
#include "surveykg/text.hpp"

namespace surveykg::pipeline {

std::vector<refs::BibEntry> reference_entries(const layout::Document& doc) {
  try {
    return refs::parse_reference_list(doc);
  } catch (const Error& e) {
    if (e.code() != Errc::NoReferenceSection) throw;
    return {};
  }
}

refs::BibEntry complete_entry(const refs::BibEntry& entry, refs::MetadataClient* client) {
  if (!client || (!entry.title && !entry.doi)) return entry;
  return refs::lookup_metadata(entry, *client).entry;
}

std::vector<refs::LinkResult> auto_link(const format::SurveyTable& table, const std::vector<refs::BibEntry>& entries,
                                        refs::MetadataClient* client) {
  auto links = refs::link_rows(table, entries);
  for (auto& l : links) {
    if (l.entry) l.entry = complete_entry(*l.entry, client);
  }
  return links;
}

refs::BibEntry manual_entry(std::string_view citation, refs::MetadataClient* client) {
  refs::BibEntry e = refs::parse_citation_string(citation);
  try {
    e.key = refs::generate_key(e);
  } catch (const Error&) {
    // no author or year: the entry stays keyless
  }
  return complete_entry(e, client);
}

refs::BibEntry prompt_manual_citation(std::string_view context, std::istream& in, std::ostream& out,
                                      refs::MetadataClient* client) {
  out << context << "\nPaste the full citation (end of input aborts): " << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) return manual_entry(line, client);
  }
  throw Error(Errc::AbortedByUser, "no citation entered for " + std::string(context));
}

std::unique_ptr<refs::MetadataClient> metadata_client_from_env() {
  const auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  if (const std::string records = env("SURVEYKG_METADATA_RECORDS"); !records.empty()) {
    return std::make_unique<refs::MockMetadataClient>(refs::MockMetadataClient::from_file(records));
  }
  const std::string offline = env("SURVEYKG_OFFLINE");
  if (!offline.empty() && offline != "0") return nullptr;
  if (const std::string url = env("SURVEYKG_METADATA_URL"); !url.empty()) {
    return std::make_unique<refs::CrossrefClient>(url);
  }
  return nullptr;
}

}  // namespace surveykg::pipeline
