#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ecgm {

enum class ErrorKind : std::uint8_t {
  Parameter,
  Length,
  RowFormat,
  ProtocolState,
  TransportGap,
  Configuration,
  InsufficientData,
  UndefinedRuntime,
  Export,
  Parse,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for every domain failure; `kind()` says which.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class TransportGapError : public Error {
 public:
  TransportGapError(std::uint32_t missing_seq, const std::string& what)
      : Error(ErrorKind::TransportGap, what), missing_seq_(missing_seq) {}

  std::uint32_t missing_seq() const noexcept { return missing_seq_; }

 private:
  std::uint32_t missing_seq_;
};

}  // namespace ecgm
