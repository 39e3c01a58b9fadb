#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surveykg {

/// Failure categories shared by every stage of the import pipeline. The names
/// are stable: the CLI prints them in machine-readable error lines and the
/// HTTP service returns them in error bodies.
enum class Errc {
  // layout
  FileUnreadable,
  NotAPdf,
  EncryptedPdf,
  NoTextLayer,
  MalformedPdf,
  PageOutOfRange,
  InvalidRegion,
  // extraction
  InsufficientRulings,
  EmptyRegion,
  ColumnCountMismatch,
  // formatting
  EmptyGrid,
  IndexOutOfRange,
  MergeShapeMismatch,
  NoLegend,
  IoError,
  CsvParseError,
  EditScriptError,
  RuleViolations,
  // references
  NoReferenceSection,
  UnrecognizedKeyFormat,
  ServiceUnavailable,
  MissingAuthorOrYear,
  UnresolvedRows,
  LinkCoverageMismatch,
  AbortedByUser,
  // graph
  EmptyLabel,
  UnresolvedReference,
  UnknownComparison,
  MissingTitle,
  MissingSourceReference,
  MissingMetadataColumns,
  CorruptStore,
  SettingsError,
  // cli
  UsageError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const { return errc_name(code_); }

 private:
  Errc code_;
};

/// Raised when metadata columns cannot be appended because some rows still
/// lack a linked bibliography entry.
class UnresolvedRowsError : public Error {
 public:
  explicit UnresolvedRowsError(std::vector<std::size_t> rows);

  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

}  // namespace surveykg
