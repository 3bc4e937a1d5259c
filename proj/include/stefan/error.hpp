#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

enum class ErrorKind {
  resolution,
  configuration,
  invalid_geometry,
  degenerate_map,
  needs_more_steps,
  numerical,
  usage,
  unsupported,
  incompatible_data,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::invalid_geometry: return "invalid-geometry";
    case ErrorKind::degenerate_map: return "degenerate-map";
    case ErrorKind::needs_more_steps: return "needs-more-steps";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::usage: return "usage";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::incompatible_data: return "incompatible-data";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stefan
