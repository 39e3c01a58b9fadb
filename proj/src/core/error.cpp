#include "surveykg/error.hpp"

namespace surveykg {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::FileUnreadable: return "FileUnreadable";
    case Errc::NotAPdf: return "NotAPdf";
    case Errc::EncryptedPdf: return "EncryptedPdf";
    case Errc::NoTextLayer: return "NoTextLayer";
    case Errc::MalformedPdf: return "MalformedPdf";
    case Errc::PageOutOfRange: return "PageOutOfRange";
    case Errc::InvalidRegion: return "InvalidRegion";
    case Errc::InsufficientRulings: return "InsufficientRulings";
    case Errc::EmptyRegion: return "EmptyRegion";
    case Errc::ColumnCountMismatch: return "ColumnCountMismatch";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::MergeShapeMismatch: return "MergeShapeMismatch";
    case Errc::NoLegend: return "NoLegend";
    case Errc::IoError: return "IoError";
    case Errc::CsvParseError: return "CsvParseError";
    case Errc::EditScriptError: return "EditScriptError";
    case Errc::RuleViolations: return "RuleViolations";
    case Errc::NoReferenceSection: return "NoReferenceSection";
    case Errc::UnrecognizedKeyFormat: return "UnrecognizedKeyFormat";
    case Errc::ServiceUnavailable: return "ServiceUnavailable";
    case Errc::MissingAuthorOrYear: return "MissingAuthorOrYear";
    case Errc::UnresolvedRows: return "UnresolvedRows";
    case Errc::LinkCoverageMismatch: return "LinkCoverageMismatch";
    case Errc::AbortedByUser: return "AbortedByUser";
    case Errc::EmptyLabel: return "EmptyLabel";
    case Errc::UnresolvedReference: return "UnresolvedReference";
    case Errc::UnknownComparison: return "UnknownComparison";
    case Errc::MissingTitle: return "MissingTitle";
    case Errc::MissingSourceReference: return "MissingSourceReference";
    case Errc::MissingMetadataColumns: return "MissingMetadataColumns";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::SettingsError: return "SettingsError";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

namespace {

std::string describe_rows(const std::vector<std::size_t>& rows) {
  std::string out = "rows without a linked reference:";
  for (auto r : rows) out += " " + std::to_string(r);
  return out;
}

}  // namespace

UnresolvedRowsError::UnresolvedRowsError(std::vector<std::size_t> rows)
    : Error(Errc::UnresolvedRows, describe_rows(rows)), rows_(std::move(rows)) {}

}  // namespace surveykg
