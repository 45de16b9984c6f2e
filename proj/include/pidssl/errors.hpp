#ifndef PIDSSL_ERRORS_HPP
#define PIDSSL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pidssl {

// Bad or missing configuration / input files. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or parameters during training. CLI maps this to exit code 3.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pidssl

#endif
