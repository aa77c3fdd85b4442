#include "comclip/errors.hpp"

namespace comclip {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kData:
      return 2;
    case ErrorKind::kBackend:
      return 3;
  }
  return 1;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kBackend:
      return "backend";
  }
  return "usage";
}

}  // namespace comclip
