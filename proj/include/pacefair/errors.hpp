#pragma once

#include <stdexcept>
#include <string>

namespace pacefair {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed inputs: wrong shapes, negative entries, bad parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidHorizon : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidRank : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ZeroExpectedValue : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonpositiveBeta : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonpositiveReference : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class GridMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Configuration files that are missing, unparsable or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine stopped before reaching its tolerance.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace pacefair
