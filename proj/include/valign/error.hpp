#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace valign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One problem found while checking an instance, located by a JSON-style
/// field path such as `borrow_pits[0].section`.
struct Issue {
  std::string path;
  std::string message;
};

/// Raised when an instance (or instance file) violates its invariants.
/// Carries every issue found, not only the first.
class InstanceError : public Error {
 public:
  explicit InstanceError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

class BuildError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

}  // namespace valign
