#pragma once

#include <stdexcept>

namespace genreg {

/// File missing, unreadable, or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace genreg
