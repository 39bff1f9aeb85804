#include "roadmind/error.hpp"

namespace roadmind {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::EmptyExtract: return "EmptyExtract";
    case ErrorKind::EmptyNetwork: return "EmptyNetwork";
    case ErrorKind::UnknownRoad: return "UnknownRoad";
    case ErrorKind::DegeneratePair: return "DegeneratePair";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedXml:
    case ErrorKind::IoFailure:
      return 2;
    case ErrorKind::EmptyExtract:
    case ErrorKind::EmptyNetwork:
      return 3;
    case ErrorKind::SchemaError:
      return 4;
    default:
      return 1;
  }
}

}  // namespace roadmind
