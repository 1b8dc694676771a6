#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace analogy {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied data: malformed files, schema violations,
// corpus/store mismatches. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : DataError(message + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class SchemaError : public DataError {
 public:
  SchemaError(std::size_t line, std::string field_path, const std::string& message)
      : DataError("line " + std::to_string(line) + ", field '" + field_path + "': " + message),
        line_(line),
        field_path_(std::move(field_path)) {}

  std::size_t line() const { return line_; }
  const std::string& field_path() const { return field_path_; }

 private:
  std::size_t line_;
  std::string field_path_;
};

// Bad magic, version, truncation or checksum in one of the binary formats.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class MissingKeyError : public DataError {
 public:
  explicit MissingKeyError(std::string key)
      : DataError("embedding store has no entry for key '" + key + "'"), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Raised when the training loss stops being finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace analogy
