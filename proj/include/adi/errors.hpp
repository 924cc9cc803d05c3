#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adi {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyPool : Error {
  using Error::Error;
};
struct EmptyClass : Error {
  using Error::Error;
};
struct EmptyLeaf : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct SingleClass : Error {
  using Error::Error;
};
struct NonDifferentiable : Error {
  using Error::Error;
};
struct DegenerateClassCount : Error {
  using Error::Error;
};
struct SinkhornNonConvergence : Error {
  using Error::Error;
};
struct PackingFailure : Error {
  using Error::Error;
};
struct SpecMismatch : Error {
  using Error::Error;
};
struct IndivisibleDim : Error {
  using Error::Error;
};
struct BindFailure : Error {
  using Error::Error;
};
struct ModelLoadFailure : Error {
  using Error::Error;
};
struct ConnectionFailure : Error {
  using Error::Error;
};
struct ProtocolError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

/// File-format error carrying the byte offset where parsing stopped.
struct MalformedFile : Error {
  MalformedFile(const std::string& path, std::size_t offset, const std::string& detail)
      : Error(path + ": " + detail + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

}  // namespace adi
