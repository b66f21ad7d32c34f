// SPDX-License-Identifier: Apache-2.0

#include "quantprune/errors.hpp"

namespace quantprune {

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::configuration:
      return 2;
    case ErrorCategory::data:
      return 3;
    case ErrorCategory::format:
      return 4;
    case ErrorCategory::io:
      return 5;
  }
  return 1;
}

}  // namespace quantprune
