#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace valuesim {

enum class Errc {
  MalformedDocument,
  ScaleBoundsInvalid,
  UnknownConstruct,
  DuplicateItemId,
  RatingOutOfRange,
  UnknownItemId,
  IncompleteAnswers,
  NetworkError,
  RateLimited,
  AuthError,
  Timeout,
  NoParse,
  OutOfRange,
  StoreCorrupt,
  EmptyPool,
  EmptyCell,
  ConstantVector,
  NoMatch,
  DegeneratePrior,
  AllZeroScores,
  EmptyPoolForWeightedPrime,
  LengthMismatch,
  ConstantInput,
  ConstantColumn,
  RowCountMismatch,
  NotSymmetric,
  NegativeEntries,
  DimensionTooLarge,
  LabelMismatch,
  DegenerateConfiguration,
  ShapeMismatch,
  InvalidArgument,
  IoError,
};

constexpr std::string_view errc_name(Errc e) noexcept {
  switch (e) {
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::ScaleBoundsInvalid: return "ScaleBoundsInvalid";
    case Errc::UnknownConstruct: return "UnknownConstruct";
    case Errc::DuplicateItemId: return "DuplicateItemId";
    case Errc::RatingOutOfRange: return "RatingOutOfRange";
    case Errc::UnknownItemId: return "UnknownItemId";
    case Errc::IncompleteAnswers: return "IncompleteAnswers";
    case Errc::NetworkError: return "NetworkError";
    case Errc::RateLimited: return "RateLimited";
    case Errc::AuthError: return "AuthError";
    case Errc::Timeout: return "Timeout";
    case Errc::NoParse: return "NoParse";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::StoreCorrupt: return "StoreCorrupt";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::EmptyCell: return "EmptyCell";
    case Errc::ConstantVector: return "ConstantVector";
    case Errc::NoMatch: return "NoMatch";
    case Errc::DegeneratePrior: return "DegeneratePrior";
    case Errc::AllZeroScores: return "AllZeroScores";
    case Errc::EmptyPoolForWeightedPrime: return "EmptyPoolForWeightedPrime";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::ConstantColumn: return "ConstantColumn";
    case Errc::RowCountMismatch: return "RowCountMismatch";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NegativeEntries: return "NegativeEntries";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` names the failure kind;
/// `what()` carries the context (item, path, column) for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::string_view name() const noexcept { return errc_name(code_); }

  /// Validation failures map to CLI exit code 1, everything else to 2.
  bool is_validation() const noexcept {
    switch (code_) {
      case Errc::NetworkError:
      case Errc::RateLimited:
      case Errc::AuthError:
      case Errc::Timeout:
      case Errc::StoreCorrupt:
      case Errc::IoError:
        return false;
      default:
        return true;
    }
  }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace valuesim
