#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beltway {

enum class ErrorKind {
  InvalidInput,
  NotPsd,
  RankTooHigh,
  NoRealRoots,
  MalformedMoment,
  DegenerateSampling,
  InfeasibleGeometry,
  InfeasibleMoment,
  ProfileMismatch,
  AssemblyFailed,
  TooLarge,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::RankTooHigh: return "RankTooHigh";
    case ErrorKind::NoRealRoots: return "NoRealRoots";
    case ErrorKind::MalformedMoment: return "MalformedMoment";
    case ErrorKind::DegenerateSampling: return "DegenerateSampling";
    case ErrorKind::InfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorKind::InfeasibleMoment: return "InfeasibleMoment";
    case ErrorKind::ProfileMismatch: return "ProfileMismatch";
    case ErrorKind::AssemblyFailed: return "AssemblyFailed";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an assembly engine runs out of candidates for a tuple.
/// Carries the offending tuple and the unconsumed pool for diagnosis.
class AssemblyFailed : public Error {
 public:
  AssemblyFailed(const std::string& what, std::vector<int> tuple, std::vector<double> remaining_pool)
      : Error(ErrorKind::AssemblyFailed, what),
        tuple_(std::move(tuple)),
        remaining_pool_(std::move(remaining_pool)) {}

  const std::vector<int>& tuple() const noexcept { return tuple_; }
  const std::vector<double>& remaining_pool() const noexcept { return remaining_pool_; }

 private:
  std::vector<int> tuple_;
  std::vector<double> remaining_pool_;
};

}  // namespace beltway
