#pragma once

#include <stdexcept>
#include <string>

namespace tabeval {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedTable : Error {
  using Error::Error;
};

struct EmptyTable : Error {
  using Error::Error;
};

struct UnparseableResponse : Error {
  using Error::Error;
};

struct BackendUnavailable : Error {
  using Error::Error;
};

struct DegenerateInput : Error {
  using Error::Error;
};

struct MissingTable : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace tabeval
