#pragma once

#include <stdexcept>
#include <string>

namespace sparseid {

/// Raised when a linear-algebra step cannot produce a usable result
/// (rank-deficient pseudo-inverse, failed SVD, non-finite objective).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A client asked for a refinement depth it is not entitled to.
class AuthorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, oversized or version-mismatched wire frame.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or inconsistent asset file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparseid
