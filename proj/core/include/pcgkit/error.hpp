#pragma once

#include <stdexcept>
#include <string>

namespace pcgkit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, violated preconditions, invalid configuration.
// The command-line tool maps this to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem or stream failure. Exit status 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcgkit
