#pragma once

#include <stdexcept>
#include <string>

namespace atlas {

/// Evaluation hit a collision singularity (q in {0,1}, v = 0, or 2v^2 = 1).
class SingularInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside an operation's admissible range.
class InvalidParams : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bracketed root search failed; the message carries bracket diagnostics.
class RootFindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trajectory integration aborted.
class IntegrationFailure : public std::runtime_error {
 public:
  enum class Kind {
    DriftExceeded,       // |K| left the configured drift bound
    SingularityApproach, // |2v^2 - 1| fell below the flow guard
    StepUnderflow,       // adaptive step shrank below machine resolution
    EventBudget,         // time budget exhausted before the requested events
  };

  IntegrationFailure(Kind kind, double t, const std::string& what)
      : std::runtime_error(what), kind(kind), t(t) {}

  Kind kind;
  double t; // integration time at which the failure occurred
};

} // namespace atlas
