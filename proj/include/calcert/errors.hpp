#pragma once

#include <stdexcept>
#include <string>

namespace calcert {

// Invalid input data or parameters (bad CSV rows, out-of-range scores,
// impossible configurations). The CLI maps this to exit code 3.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace calcert
