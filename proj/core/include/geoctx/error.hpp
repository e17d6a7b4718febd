#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoctx {

enum class ErrorKind {
  MalformedXml,
  DanglingNodeRef,
  MissingColumn,
  BadNumericCell,
  IoFailure,
  DuplicateSensorId,
  UnknownSensorColumn,
  NonUniformTimestep,
  TooShort,
  NotEnoughRoadNodes,
  UnknownNodeId,
  DimensionMismatch,
  UnknownRoot,
  ShapeMismatch,
  DegenerateBatch,
  EmptyMask,
  NonFiniteValue,
  ParameterOutOfRange,
  MissingRunArtifacts,
  BadConfig,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this type; kind() identifies the contract
// that was violated and what() carries a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace geoctx
