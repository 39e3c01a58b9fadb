#pragma once

// A two-page survey article: page 0 holds a ruled comparison table with ten
// rows, page 1 its numbered reference list. Nine row keys resolve against the
// list; row 9 cites [12], which the list lacks, and needs a manual citation.

#include <filesystem>
#include <string>
#include <vector>

#include "fixtures.hpp"

namespace surveykg::testing {

struct SurveyFixture {
  std::string pdf;
  std::string region;                    // page:x0,y0,x1,y1
  TextMatrix cells;                      // header row first
  std::vector<std::string> references;  // numbered from 1
  std::string edits;                     // edit script for the formatted table
  std::size_t unresolved_row = 9;
  std::string manual_citation;           // answer for the unresolved row
  std::string table_id = "survey/T1";
  std::string title = "Question answering systems compared";
  std::string source_reference = "Doe 2021";
  std::string records;                   // offline metadata records (TSV)
};

const SurveyFixture& survey_fixture();

/// Writes a workspace holding the article, tables.txt, the edit script,
/// settings.json and the metadata record file "records.tsv". The resolutions
/// file is written only when `with_resolutions` is set.
void write_survey_workspace(const std::filesystem::path& root, bool with_resolutions);

}  // namespace surveykg::testing
