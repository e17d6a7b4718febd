#include "geoctx/error.hpp"

namespace geoctx {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::DanglingNodeRef: return "DanglingNodeRef";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::BadNumericCell: return "BadNumericCell";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::DuplicateSensorId: return "DuplicateSensorId";
    case ErrorKind::UnknownSensorColumn: return "UnknownSensorColumn";
    case ErrorKind::NonUniformTimestep: return "NonUniformTimestep";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NotEnoughRoadNodes: return "NotEnoughRoadNodes";
    case ErrorKind::UnknownNodeId: return "UnknownNodeId";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownRoot: return "UnknownRoot";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateBatch: return "DegenerateBatch";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::MissingRunArtifacts: return "MissingRunArtifacts";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace geoctx
