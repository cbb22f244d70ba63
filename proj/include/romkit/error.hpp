#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace romkit {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Bad input, flags, files or preconditions. The CLI maps these to exit code 2.
class ConfigError : public Error
{
public:
  using Error::Error;
};

// Solver breakdown, singular systems, non-finite values. Exit code 3.
class NumericalError : public Error
{
public:
  using Error::Error;
};

class ParseError : public ConfigError
{
public:
  ParseError(const std::string& what, std::size_t offset)
    : ConfigError(what + " at byte " + std::to_string(offset)), offset_(offset)
  {}

  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Requested basis size exceeds what the snapshot spectrum supports.
class RankError : public ConfigError
{
public:
  RankError(std::size_t requested, std::size_t achievable)
    : ConfigError("requested N = " + std::to_string(requested) +
                  " exceeds numerical rank; achievable N = " + std::to_string(achievable)),
      achievable_(achievable)
  {}

  std::size_t achievable() const { return achievable_; }

private:
  std::size_t achievable_;
};

// Archive integrity and format problems.
class FormatError : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

} // namespace romkit
