#pragma once

#include <stdexcept>
#include <string>

namespace scmap {

/// Malformed input file (bad JSON/CSV, missing field, wrong type).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal contract breach (bad arguments to a library call).
class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace scmap
