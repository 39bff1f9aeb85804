#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roadmind {

enum class ErrorKind {
  MalformedXml,
  EmptyExtract,
  EmptyNetwork,
  UnknownRoad,
  DegeneratePair,
  SchemaError,
  IoFailure,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for each error class: 2 bad input file, 3 empty
// network, 4 schema error, 1 anything else.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace roadmind
