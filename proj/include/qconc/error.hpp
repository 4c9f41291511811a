#ifndef QCONC_ERROR_HPP
#define QCONC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qconc {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a request would exceed a hard resource limit (e.g. the dense
/// statevector qubit cap).
class ResourceGuard : public std::length_error {
 public:
  explicit ResourceGuard(const std::string& what) : std::length_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace detail

}  // namespace qconc

#endif  // QCONC_ERROR_HPP
