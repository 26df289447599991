#pragma once

#include <stdexcept>
#include <string>

namespace fadinglab {

// Requested accuracy cannot be delivered at the requested order/precision.
class precision_error : public std::runtime_error {
 public:
  explicit precision_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative or series computation failed to converge within its budget.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// Two routes that must agree disagreed beyond tolerance.
class consistency_error : public std::runtime_error {
 public:
  explicit consistency_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure (quadrature, acceleration) broke down; message carries diagnostics.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// The requested evaluation path does not support these inputs; another path does.
class unsupported_error : public std::invalid_argument {
 public:
  explicit unsupported_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fadinglab
