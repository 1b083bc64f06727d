#pragma once

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ontoforge {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit code 1 and prints what() verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text position, 1-based.
struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourcePos pos, std::string reason)
      : Error("syntax error at " + std::to_string(pos.line) + ":" +
              std::to_string(pos.column) + ": " + reason),
        pos_(pos),
        reason_(std::move(reason)) {}

  SourcePos pos() const { return pos_; }
  const std::string& reason() const { return reason_; }

 private:
  SourcePos pos_;
  std::string reason_;
};

class UnknownPrefix : public Error {
 public:
  UnknownPrefix(SourcePos pos, std::string prefix)
      : Error("unknown prefix '" + prefix + "' at " + std::to_string(pos.line) +
              ":" + std::to_string(pos.column)),
        pos_(pos),
        prefix_(std::move(prefix)) {}

  SourcePos pos() const { return pos_; }
  const std::string& prefix() const { return prefix_; }

 private:
  SourcePos pos_;
  std::string prefix_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed structured-text input (JSON files).
class ParseError : public Error {
 public:
  ParseError(SourcePos pos, std::string reason)
      : Error("parse error at " + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
              reason),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Line and column of a byte offset into `text`.
inline SourcePos position_at(std::string_view text, std::size_t offset) {
  SourcePos pos;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

/// Byte offsets where each element of a top-level JSON array starts.
inline std::vector<std::size_t> top_level_element_offsets(std::string_view text) {
  std::vector<std::size_t> out;
  int depth = 0;
  bool in_string = false;
  bool expect_element = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (expect_element && depth == 1 && c != ']') {
      out.push_back(i);
      expect_element = false;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth == 1) expect_element = true;
    } else if (c == ']' || c == '}') {
      --depth;
    } else if (c == ',' && depth == 1) {
      expect_element = true;
    }
  }
  return out;
}

}  // namespace ontoforge
