#ifndef DISCO_ERROR_HPP
#define DISCO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace disco {

// Malformed input text (treebank lines, rule files, dependency files, configs).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed object that violates a structural precondition
// (missing heads, cycles, broken yields).
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gold and predicted data do not line up.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not agree.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite losses or gradients.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse, e.g. backward() on a non-scalar.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace disco

#endif  // DISCO_ERROR_HPP
