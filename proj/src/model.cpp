#include "valign/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "valign/error.hpp"

namespace valign {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (kind == VarKind::binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (!(lower <= upper)) throw BuildError("variable " + name + " has empty bounds");
  const int id = static_cast<int>(variables_.size());
  if (!by_name_.emplace(name, id).second) throw BuildError("duplicate variable name " + name);
  variables_.push_back({std::move(name), kind, lower, upper});
  objective_.push_back(0.0);
  return id;
}

int MilpModel::add_constraint(std::string name, const std::vector<Term>& terms, Sense sense, double rhs) {
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= static_cast<int>(variables_.size()))
      throw BuildError("row " + name + " references an undeclared variable");
    auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) { return m.var == t.var; });
    if (it == merged.end())
      merged.push_back(t);
    else
      it->coef += t.coef;
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  const int id = static_cast<int>(constraints_.size());
  if (!row_names_.emplace(name, id).second) throw BuildError("duplicate row name " + name);
  constraints_.push_back({std::move(name), std::move(merged), sense, rhs});
  return id;
}

void MilpModel::add_sos(std::string name, SosType type, std::vector<SosMember> members) {
  sos_sets_.push_back({std::move(name), type, std::move(members)});
}

void MilpModel::add_objective(int var, double cost) { objective_.at(static_cast<std::size_t>(var)) += cost; }

std::vector<Term> MilpModel::objective() const {
  std::vector<Term> out;
  for (std::size_t j = 0; j < objective_.size(); ++j)
    if (objective_[j] != 0.0) out.push_back({static_cast<int>(j), objective_[j]});
  return out;
}

std::optional<int> MilpModel::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int MilpModel::index_of(const std::string& name) const {
  auto id = find(name);
  if (!id) throw BuildError("unknown variable " + name);
  return *id;
}

int MilpModel::binary_count() const {
  return static_cast<int>(std::count_if(variables_.begin(), variables_.end(),
                                        [](const Variable& v) { return v.kind == VarKind::binary; }));
}

std::vector<std::string> MilpModel::lint() const {
  std::vector<std::string> problems;
  const int nv = static_cast<int>(variables_.size());
  std::set<std::string> names;
  for (const auto& v : variables_) {
    if (!names.insert(v.name).second) problems.push_back("duplicate variable " + v.name);
    if (v.name.empty() || v.name.find_first_of(" \t\n") != std::string::npos)
      problems.push_back("variable name not MPS-safe: '" + v.name + "'");
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      problems.push_back("bad bounds on " + v.name);
    if (v.kind == VarKind::binary && (v.lower < 0 || v.upper > 1)) problems.push_back("binary out of [0,1]: " + v.name);
  }
  for (std::size_t j = 0; j < objective_.size(); ++j)
    if (!std::isfinite(objective_[j])) problems.push_back("non-finite objective on " + variables_[j].name);
  std::set<std::string> rows;
  for (const auto& c : constraints_) {
    if (!rows.insert(c.name).second) problems.push_back("duplicate row " + c.name);
    if (!std::isfinite(c.rhs)) problems.push_back("non-finite rhs in " + c.name);
    std::set<int> seen;
    for (const Term& t : c.terms) {
      if (t.var < 0 || t.var >= nv) problems.push_back("undeclared variable in " + c.name);
      if (!seen.insert(t.var).second) problems.push_back("duplicate term in " + c.name);
      if (!std::isfinite(t.coef)) problems.push_back("non-finite coefficient in " + c.name);
    }
  }
  for (const auto& s : sos_sets_) {
    if (s.members.size() < 2) problems.push_back("SOS set " + s.name + " has fewer than 2 members");
    std::set<double> weights;
    for (const auto& m : s.members) {
      if (m.var < 0 || m.var >= nv) problems.push_back("undeclared variable in SOS " + s.name);
      if (!weights.insert(m.weight).second) problems.push_back("repeated weight in SOS " + s.name);
    }
  }
  return problems;
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) total += objective_[j] * x.at(j);
  return total;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lower - x.at(j));
    worst = std::max(worst, x.at(j) - variables_[j].upper);
  }
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * x.at(static_cast<std::size_t>(t.var));
    switch (c.sense) {
      case Sense::le: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::ge: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::eq: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

}  // namespace valign
