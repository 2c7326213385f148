#ifndef DEID_ERROR_HPP
#define DEID_ERROR_HPP

#include <stdexcept>
#include <string>

namespace deid {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries the offending location when known.
class ParseError : public Error {
public:
  ParseError(const std::string& file, std::size_t line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg), file(file), line(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line(0) {}
  std::string file;
  std::size_t line;
};

// Invalid configuration (missing file, unknown key, bad pattern).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// External NER backend failure: spawn, protocol violation or timeout.
class BackendError : public Error {
public:
  explicit BackendError(const std::string& msg) : Error(msg) {}
};

}  // namespace deid

#endif  // DEID_ERROR_HPP
