#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace persym {

/// A formula was evaluated outside the (n, k) range where it is asserted.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Refusal to start an enumeration larger than the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(int required_bits, int budget_bits)
      : std::runtime_error("census needs about 2^" + std::to_string(required_bits) +
                           " rank evaluations, budget is 2^" + std::to_string(budget_bits) +
                           "; raise --budget to at least " + std::to_string(required_bits)),
        required_bits_(required_bits),
        budget_bits_(budget_bits) {}

  int required_bits() const noexcept { return required_bits_; }
  int budget_bits() const noexcept { return budget_bits_; }

 private:
  int required_bits_;
  int budget_bits_;
};

/// A census or report violates one of its structural invariants.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionError : public std::runtime_error {
 public:
  SchemaVersionError(std::int64_t found, std::int64_t expected)
      : std::runtime_error("census schema version " + std::to_string(found) +
                           " is not supported (expected " + std::to_string(expected) + ")") {}
};

/// Input data contradicts itself, e.g. a census prefix that sums past the total.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace persym
