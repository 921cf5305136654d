#pragma once

#include <stdexcept>
#include <string>

namespace tabal {

// User-facing configuration problems (bad flag values, incompatible strategy
// and input). The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-format and filesystem problems. The CLI maps these to exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tabal
