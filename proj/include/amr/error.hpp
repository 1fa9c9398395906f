#pragma once

#include <stdexcept>
#include <string>

namespace amr {

/// Bad user input: malformed files, out-of-range parameters, unknown labels.
/// The CLI maps this to exit code 2; anything else escaping is exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace amr
