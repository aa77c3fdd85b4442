#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comclip {

// Coarse error classes. The CLI maps these onto exit codes 1/2/3.
enum class ErrorKind { kUsage, kData, kBackend };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string type, const std::string& message)
      : std::runtime_error(message), kind_(kind), type_(std::move(type)) {}

  ErrorKind kind() const { return kind_; }
  // Stable machine-readable name, e.g. "SchemaError".
  const std::string& type() const { return type_; }

 private:
  ErrorKind kind_;
  std::string type_;
};

#define COMCLIP_DEFINE_ERROR(Name, Kind)                       \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& message)                  \
        : Error(ErrorKind::Kind, #Name, message) {}            \
  };

COMCLIP_DEFINE_ERROR(UsageError, kUsage)
COMCLIP_DEFINE_ERROR(EmptySentence, kData)
COMCLIP_DEFINE_ERROR(NoTripleFound, kData)
COMCLIP_DEFINE_ERROR(InvalidBox, kData)
COMCLIP_DEFINE_ERROR(NoRegions, kData)
COMCLIP_DEFINE_ERROR(DimensionMismatch, kData)
COMCLIP_DEFINE_ERROR(DecodeError, kData)
COMCLIP_DEFINE_ERROR(MissingImage, kData)
COMCLIP_DEFINE_ERROR(MissingFile, kData)
COMCLIP_DEFINE_ERROR(EmptyText, kData)
COMCLIP_DEFINE_ERROR(BackendUnavailable, kBackend)

#undef COMCLIP_DEFINE_ERROR

// Dataset row failed validation. Carries the 1-based line number.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kData, "SchemaError",
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

int exit_code_for(ErrorKind kind);
const char* to_string(ErrorKind kind);

}  // namespace comclip
