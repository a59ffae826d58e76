#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace normcrit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Error codes mirrored 1:1 by the exceptions thrown across the library.
enum class ErrorCode {
  NonPositiveExtent,
  UnsupportedDimension,
  ResolutionTooSmall,
  CenterOutsideDomain,
  SolverNoConvergence,
  NoConverge,
  CollapsedToZero,
  CountExceedsDimension,
  DegenerateBoundaryForm,
  NonDistinctEigenvalue,
  SOutOfRange,
  MassAtOrAboveMu,
  ExponentOutOfRange,
  HypothesisViolated,
  NoSolutionsFound,
  EmptyRecordSet,
  ModeUnsupported,
  ConfigInvalid,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveExtent: return "NonPositiveExtent";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::ResolutionTooSmall: return "ResolutionTooSmall";
    case ErrorCode::CenterOutsideDomain: return "CenterOutsideDomain";
    case ErrorCode::SolverNoConvergence: return "SolverNoConvergence";
    case ErrorCode::NoConverge: return "NoConverge";
    case ErrorCode::CollapsedToZero: return "CollapsedToZero";
    case ErrorCode::CountExceedsDimension: return "CountExceedsDimension";
    case ErrorCode::DegenerateBoundaryForm: return "DegenerateBoundaryForm";
    case ErrorCode::NonDistinctEigenvalue: return "NonDistinctEigenvalue";
    case ErrorCode::SOutOfRange: return "SOutOfRange";
    case ErrorCode::MassAtOrAboveMu: return "MassAtOrAboveMu";
    case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoSolutionsFound: return "NoSolutionsFound";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::ModeUnsupported: return "ModeUnsupported";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

}  // namespace normcrit
