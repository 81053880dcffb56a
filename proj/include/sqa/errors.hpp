#pragma once

#include <stdexcept>
#include <string>

namespace sqa {

// Invalid input or a request outside an oracle's size limit. The CLI maps it to exit code 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical failure inside an otherwise valid computation (exit code 2).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqa
