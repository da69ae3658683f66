#pragma once

#include <stdexcept>
#include <string>

namespace cwpor {

// Base for every error the harness raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LogError : public Error {
 public:
  using Error::Error;
};

}  // namespace cwpor
