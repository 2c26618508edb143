#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace escrk {

/// Base for failures of a numerical computation on otherwise valid input
/// (instability, solver breakdown, quadrature non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when b_1..b_{s-2} = 0, b_{s-1} < 0 fails, so no strong-stability
/// bound exists. Carries the first offending energy coefficient.
class NotStronglyStable : public std::domain_error {
 public:
  NotStronglyStable(std::size_t index, double value)
      : std::domain_error("not strongly stable: b_" + std::to_string(index) + " = " +
                          std::to_string(value)),
        index_(index),
        value_(value) {}

  [[nodiscard]] std::size_t index() const noexcept { return index_; }
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// Non-finite value produced inside a stage; `step` is filled in by the
/// driver that owns the step counter.
class StageOverflow : public NumericalError {
 public:
  StageOverflow(std::size_t stage, std::size_t step)
      : NumericalError("overflow/NaN in stage " + std::to_string(stage) + " at step " + std::to_string(step)),
        stage_(stage),
        step_(step) {}

  [[nodiscard]] std::size_t stage() const noexcept { return stage_; }
  [[nodiscard]] std::size_t step() const noexcept { return step_; }

 private:
  std::size_t stage_;
  std::size_t step_;
};

}  // namespace escrk
