#include "redq/model.hpp"

namespace redq {

std::string_view to_string(ServerMode mode) {
  switch (mode) {
    case ServerMode::kIdle:
      return "idle";
    case ServerMode::kBusy:
      return "busy";
    case ServerMode::kCooldown:
      return "cooldown";
  }
  return "?";
}

std::string_view to_string(BufferMode mode) {
  return mode == BufferMode::kCentral ? "central" : "distributed";
}

}  // namespace redq
