#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dfol {

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Bad dimension, radius or index.
struct InvalidArgument : Error
{
  using Error::Error;
};

// The environment does not provide the requested capability (exact risk, stationary draws, ...).
struct OracleAbsent : Error
{
  using Error::Error;
};

struct UnsupportedAlgorithm : Error
{
  using Error::Error;
};

struct DomainError : Error
{
  using Error::Error;
};

struct ConfigError : Error
{
  using Error::Error;
};

struct IoError : Error
{
  using Error::Error;
};

} // namespace dfol
