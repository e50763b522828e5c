#pragma once

#include <stdexcept>
#include <string>

namespace festa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scoring precondition violated (bad support, label outside distribution).
struct DomainError : Error {
  using Error::Error;
};

// Out-of-range transform parameter or malformed configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Undecodable media or other bad external input.
struct InputError : Error {
  using Error::Error;
};

// Manifest / record schema violation. Message carries the line number.
struct ValidationError : Error {
  using Error::Error;
};

// No invertible relation found when a complementary text sample was requested.
struct NotComplementable : Error {
  using Error::Error;
};

// Network-level failure after the retry budget is exhausted.
struct TransportError : Error {
  using Error::Error;
};

// HTTP non-2xx from the model endpoint.
struct UpstreamError : Error {
  UpstreamError(int status, const std::string& what)
      : Error(what), status(status) {}
  int status;
};

// Instance cannot be scored (zero parseable responses, >50% parse failures).
struct InstanceUnusable : Error {
  using Error::Error;
};

// CLI misuse.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace festa
