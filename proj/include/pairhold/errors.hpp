#pragma once

#include <stdexcept>
#include <string>

namespace pairhold {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero/negative extent boxes, non-finite coordinates, empty crops.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Shape/dimension mismatches, empty grids, bad labels.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents do not follow the expected schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pair scorer failed; the message names the image and pair.
class ScorerError : public Error {
 public:
  using Error::Error;
};

}  // namespace pairhold
