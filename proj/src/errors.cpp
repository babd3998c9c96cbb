#include "cascade/errors.hpp"

namespace cascade {

const char* to_string(SchemaReason reason) noexcept {
  switch (reason) {
    case SchemaReason::parse_error:
      return "parse_error";
    case SchemaReason::wrong_count:
      return "wrong_count";
    case SchemaReason::empty_title:
      return "empty_title";
    case SchemaReason::missing_concepts:
      return "missing_concepts";
    case SchemaReason::duplicate_title:
      return "duplicate_title";
  }
  return "unknown";
}

}  // namespace cascade
