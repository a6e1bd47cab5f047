#ifndef QUADBENCH_ERROR_HPP
#define QUADBENCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace quadbench {

// Failure categories surfaced by the library. The string form of each kind is
// stable and is what the CLI prints.
enum class ErrorKind {
  NonFiniteState,
  IntegrationDiverged,
  DegenerateRotation,
  EpisodeOver,
  ShapeError,
  NoForwardCache,
  NotEnoughData,
  DivergedTraining,
  NotPeriodic,
  EmptyRun,
  CountMismatch,
  InvalidConfig,
  UnknownName,
  MissingData,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::IntegrationDiverged: return "IntegrationDiverged";
    case ErrorKind::DegenerateRotation: return "DegenerateRotation";
    case ErrorKind::EpisodeOver: return "EpisodeOver";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::NoForwardCache: return "NoForwardCache";
    case ErrorKind::NotEnoughData: return "NotEnoughData";
    case ErrorKind::DivergedTraining: return "DivergedTraining";
    case ErrorKind::NotPeriodic: return "NotPeriodic";
    case ErrorKind::EmptyRun: return "EmptyRun";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::MissingData: return "MissingData";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) +
                           (detail.empty() ? "" : ": " + detail)),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace quadbench

#endif  // QUADBENCH_ERROR_HPP
