#include <fstream>
#include <sstream>

#include <json.hpp>

#include "surveykg/error.hpp"
#include "surveykg/graph/store.hpp"

namespace surveykg::graph {

std::vector<SettingsEntry> parse_settings(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::SettingsError, "settings are not valid JSON");
  if (!j.is_array()) throw Error(Errc::SettingsError, "settings must be a list of entries");
  std::vector<SettingsEntry> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string at = "settings entry " + std::to_string(i);
    if (!e.is_object()) throw Error(Errc::SettingsError, at + " is not an object");
    SettingsEntry s;
    for (auto [field, target] : {std::pair{"table_id", &s.table_id}, std::pair{"title", &s.title},
                                 std::pair{"source_reference", &s.source_reference}}) {
      if (!e.contains(field) || e[field].is_null()) continue;
      if (!e[field].is_string()) throw Error(Errc::SettingsError, at + ": '" + field + "' must be text");
      *target = e[field].get<std::string>();
    }
    if (s.table_id.empty()) throw Error(Errc::SettingsError, at + " has no table_id");
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_settings(const std::vector<SettingsEntry>& entries) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    j.push_back({{"table_id", e.table_id}, {"title", e.title}, {"source_reference", e.source_reference}});
  }
  return j.dump(2) + "\n";
}

std::vector<SettingsEntry> read_settings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::SettingsError, "cannot read settings " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

void write_settings(const std::filesystem::path& path, const std::vector<SettingsEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << render_settings(entries);
  if (!out) throw Error(Errc::IoError, "cannot write settings " + path.string());
}

}  // namespace surveykg::graph
