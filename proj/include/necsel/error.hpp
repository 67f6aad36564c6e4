#pragma once

#include <stdexcept>
#include <string>

namespace necsel {

// Error classes map 1:1 onto CLI exit codes (usage=1 ... internal=4).
enum class ErrorKind { usage = 1, validation = 2, data = 3, internal = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

enum class ConfigFault {
  sizes_exceed_pool,
  nonpositive_temperature,
  zero_group_size,
  bad_value,
  unknown_key,
  mismatch,
};

const char* to_string(ConfigFault fault);

class ConfigError : public Error {
 public:
  ConfigError(ConfigFault fault, const std::string& what)
      : Error(ErrorKind::validation, what), fault_(fault) {}

  ConfigFault fault() const noexcept { return fault_; }

 private:
  ConfigFault fault_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorKind::internal, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

}  // namespace necsel
