// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace mmadoa {

// Invalid input data or out-of-domain arguments. The CLI maps this to exit code 1;
// any other exception is a runtime failure (exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mmadoa
