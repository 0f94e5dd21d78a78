#pragma once

#include <stdexcept>
#include <string>

namespace pricelab {

// Malformed distribution or instance detected at construction time.
class DistributionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter lies outside the documented range of an operation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Grid or experiment configuration that cannot produce a meaningful result.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// phi(x) requested where the density vanishes.
class UndefinedVirtualValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// lambda(x) requested where F(x) = 1.
class ExhaustedSupport : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A certified construction failed its class validator.
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal bookkeeping broke (e.g. pull counts do not sum to the horizon).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pricelab
