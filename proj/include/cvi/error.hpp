#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cvi {

enum class ErrorKind {
  InvalidArgument,
  RankDeficient,
  MaxIterationsExceeded,
  SingularJacobian,
  SingularSystem,
  InfeasibleWarmStart,
  NonTerminating,
  MissingLMO,
  ZeroReference,
};

std::string_view to_string(ErrorKind kind);

/**
 * Single exception type for every solver-side failure. The kind is stable and
 * testable; the (outer, inner) iteration context is attached by the run loops
 * when a subproblem fails mid-run.
 */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  const std::optional<std::pair<int, int>>& context() const { return context_; }

  /// Returns a copy annotated with the (t, k) location of the failure.
  Error with_context(int outer, int inner) const;

 private:
  ErrorKind kind_;
  std::optional<std::pair<int, int>> context_;
};

}  // namespace cvi
