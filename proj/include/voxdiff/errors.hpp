#pragma once

#include <stdexcept>
#include <string>

namespace voxdiff {

// Error categories map 1:1 onto CLI exit codes (see README).
enum class ErrorCategory {
    invalid_argument,  // bad parameter or flag value
    shape_mismatch,    // dimension disagreement between fields
    config,            // config file / schema violation
    missing_input,     // required input file absent
    io,                // read/write failure, checksum mismatch, malformed header
    numeric,           // non-finite values, divergence
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

[[noreturn]] inline void raise(ErrorCategory category, const std::string& message) {
    throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
    if (!condition) raise(category, message);
}

}  // namespace voxdiff
