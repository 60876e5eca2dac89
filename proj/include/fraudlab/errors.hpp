#pragma once

#include <stdexcept>
#include <string>

namespace fraudlab {

// Problems with input data: missing/ragged/non-numeric CSV cells, bad labels,
// invariant-violating datasets. Mapped to exit code 2 by the CLI.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime/numeric failures: diverging training, non-finite gradients, empty
// attack target sets. Mapped to exit code 3 by the CLI.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fraudlab
