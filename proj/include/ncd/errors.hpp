#ifndef NCD_ERRORS_HPP
#define NCD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ncd {

// Exit-code taxonomy used by the CLI:
//   2 usage/validation, 3 data (file/parse), 4 numeric failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace ncd

#endif  // NCD_ERRORS_HPP
