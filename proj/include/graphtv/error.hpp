#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphtv {

enum class Errc {
  NonPositiveLambda,
  NegativeWeight,
  SelfLoop,
  ParallelEdge,
  IndexOutOfRange,
  LengthMismatch,
  ShapeMismatch,
  AllCollinear,
  TooFewPoints,
  EdgeNotActive,
  WouldCreateCycle,
  NonFiniteData,
  IterationLimitExceeded,
  NoFeasibleEvent,
  EmptyRegionMean,
  NoEdges,
  TargetUnreachable,
  NonPositiveSigma,
  DimensionMismatch,
  NotConverged,
  MalformedHeader,
  TruncatedData,
  DuplicateX,
  ParseError,
};

inline std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::NonPositiveLambda: return "NonPositiveLambda";
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::ParallelEdge: return "ParallelEdge";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::AllCollinear: return "AllCollinear";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::EdgeNotActive: return "EdgeNotActive";
    case Errc::WouldCreateCycle: return "WouldCreateCycle";
    case Errc::NonFiniteData: return "NonFiniteData";
    case Errc::IterationLimitExceeded: return "IterationLimitExceeded";
    case Errc::NoFeasibleEvent: return "NoFeasibleEvent";
    case Errc::EmptyRegionMean: return "EmptyRegionMean";
    case Errc::NoEdges: return "NoEdges";
    case Errc::TargetUnreachable: return "TargetUnreachable";
    case Errc::NonPositiveSigma: return "NonPositiveSigma";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotConverged: return "NotConverged";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::DuplicateX: return "DuplicateX";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// True for failures of the numerical machinery rather than of the input.
inline bool is_numerical(Errc e) {
  return e == Errc::IterationLimitExceeded || e == Errc::NoFeasibleEvent ||
         e == Errc::NotConverged || e == Errc::TargetUnreachable;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace graphtv
