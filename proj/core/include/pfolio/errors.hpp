#ifndef PFOLIO_ERRORS_HPP
#define PFOLIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pfolio {

// Malformed user input (scenario files, feature rows, CLI values).
// The command line tool maps this to exit code 2; everything else is
// an internal error (exit code 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds a "<file>:<line>: <message>" diagnostic.
inline ValidationError input_error(const std::string& file, std::size_t line,
                                   const std::string& message) {
  return ValidationError(file + ":" + std::to_string(line) + ": " + message);
}

}  // namespace pfolio

#endif
