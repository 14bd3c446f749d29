#pragma once

#include <stdexcept>
#include <string>

namespace distmin {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two collections zipped or joined under different partitioners.
class PartitionerMismatch : public Error {
 public:
  using Error::Error;
};

// Vector operands with different (length, block size, rows).
class MetadataMismatch : public Error {
 public:
  using Error::Error;
};

// Potential vector and cost grid disagree on shape.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Feature index outside the model dimension.
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class UnknownClass : public Error {
 public:
  using Error::Error;
};

// A sampled negative whose link field names no positive example.
class LinkMismatch : public Error {
 public:
  using Error::Error;
};

class LineSearchFailed : public Error {
 public:
  using Error::Error;
};

// Malformed input file (vector dump, example file, manifest, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace distmin
