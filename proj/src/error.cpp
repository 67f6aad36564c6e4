#include "necsel/error.hpp"

namespace necsel {

const char* to_string(ConfigFault fault) {
  switch (fault) {
    case ConfigFault::sizes_exceed_pool: return "sizes_exceed_pool";
    case ConfigFault::nonpositive_temperature: return "nonpositive_temperature";
    case ConfigFault::zero_group_size: return "zero_group_size";
    case ConfigFault::bad_value: return "bad_value";
    case ConfigFault::unknown_key: return "unknown_key";
    case ConfigFault::mismatch: return "mismatch";
  }
  return "unknown";
}

}  // namespace necsel
