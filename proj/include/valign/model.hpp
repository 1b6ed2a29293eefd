#pragma once

#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace valign {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = kInf;
};

enum class Sense { le, eq, ge };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct LinearConstraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

enum class SosType { sos1 = 1, sos2 = 2 };

struct SosMember {
  int var = 0;
  double weight = 0.0;
};

struct SosSet {
  std::string name;
  SosType type = SosType::sos1;
  std::vector<SosMember> members;
};

/// Solver-neutral minimisation MILP. Variables, rows and SOS sets keep their
/// declaration order, which is also the order they are written out in.
class MilpModel {
 public:
  /// Throws BuildError on a duplicate name or an empty bound interval.
  int add_variable(std::string name, VarKind kind, double lower, double upper);
  int add_continuous(std::string name, double lower = 0.0, double upper = kInf) {
    return add_variable(std::move(name), VarKind::continuous, lower, upper);
  }
  int add_binary(std::string name) { return add_variable(std::move(name), VarKind::binary, 0.0, 1.0); }

  /// Repeated variables in `terms` are merged; zero coefficients are kept
  /// out of the row.
  int add_constraint(std::string name, const std::vector<Term>& terms, Sense sense, double rhs);
  void add_sos(std::string name, SosType type, std::vector<SosMember> members);

  void add_objective(int var, double cost);
  double objective_coef(int var) const { return objective_[static_cast<std::size_t>(var)]; }
  /// Nonzero objective entries in declaration order.
  std::vector<Term> objective() const;

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const std::vector<SosSet>& sos_sets() const { return sos_sets_; }
  const Variable& variable(int var) const { return variables_[static_cast<std::size_t>(var)]; }
  Variable& variable(int var) { return variables_[static_cast<std::size_t>(var)]; }

  std::optional<int> find(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws BuildError when absent

  int binary_count() const;

  /// Free-text tag written as a comment into emitted files (e.g. config name).
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  /// Structural problems (undeclared variables, duplicate terms, non-finite
  /// data, malformed SOS sets). Empty when the model is well formed.
  std::vector<std::string> lint() const;

  /// Objective value and worst row violation of an assignment indexed like
  /// variables().
  double evaluate_objective(const std::vector<double>& x) const;
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<LinearConstraint> constraints_;
  std::vector<SosSet> sos_sets_;
  std::unordered_map<std::string, int> by_name_;
  std::unordered_map<std::string, int> row_names_;
  std::string provenance_;
};

}  // namespace valign
