#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roboost {

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when conditioning on an event of (numerically) zero mass.
/// Boosting loops treat this as a termination signal, so it is kept
/// distinct from InvalidArgument.
class EmptyEvent : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
public:
  BudgetExhausted(std::size_t drawn, std::size_t budget)
      : std::runtime_error("sampling budget exhausted after " + std::to_string(drawn) +
                           " draws (budget " + std::to_string(budget) + ")"),
        drawn_(drawn),
        budget_(budget) {}

  std::size_t drawn() const noexcept { return drawn_; }
  std::size_t budget() const noexcept { return budget_; }

private:
  std::size_t drawn_;
  std::size_t budget_;
};

/// The scripted learner could not build a hypothesis meeting its robustness target.
class InfeasibleScript : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class WeakLearnerFailure : public std::runtime_error {
public:
  WeakLearnerFailure(std::size_t round, std::size_t attempts)
      : std::runtime_error("weak learner failed to reach robust risk <= 1/3 in round " +
                           std::to_string(round) + " after " + std::to_string(attempts) +
                           " attempts"),
        round_(round) {}

  std::size_t round() const noexcept { return round_; }

private:
  std::size_t round_;
};

}  // namespace roboost
