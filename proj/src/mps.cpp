#include "valign/mps.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "valign/error.hpp"

namespace valign {

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

const char* row_type(Sense s) {
  switch (s) {
    case Sense::le: return "L";
    case Sense::ge: return "G";
    case Sense::eq: return "E";
  }
  return "E";
}

}  // namespace

void write_mps(const MilpModel& model, std::ostream& out) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  // Column-major view of the rows.
  std::vector<std::vector<std::pair<int, double>>> columns(vars.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const Term& t : rows[r].terms) columns[static_cast<std::size_t>(t.var)].emplace_back(static_cast<int>(r), t.coef);

  out << "* valign vertical alignment model\n";
  if (!model.provenance().empty()) out << "* config: " << model.provenance() << "\n";
  out << "NAME VALIGN FREE\n";
  out << "ROWS\n";
  out << " N OBJ\n";
  for (const auto& row : rows) out << ' ' << row_type(row.sense) << ' ' << row.name << '\n';

  out << "COLUMNS\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double c = model.objective_coef(static_cast<int>(j));
    if (c != 0.0 || columns[j].empty()) out << "    " << vars[j].name << " OBJ " << format_number(c) << '\n';
    for (const auto& [r, coef] : columns[j])
      out << "    " << vars[j].name << ' ' << rows[static_cast<std::size_t>(r)].name << ' ' << format_number(coef) << '\n';
  }

  out << "RHS\n";
  for (const auto& row : rows)
    if (row.rhs != 0.0) out << "    RHS " << row.name << ' ' << format_number(row.rhs) << '\n';

  out << "RANGES\n";

  out << "BOUNDS\n";
  for (const auto& v : vars) {
    if (v.kind == VarKind::binary && v.lower == 0.0 && v.upper == 1.0) {
      out << " BV BND " << v.name << '\n';
      continue;
    }
    if (v.kind == VarKind::binary) {  // a binary pinned by bounds
      out << " BV BND " << v.name << '\n';
      out << " FX BND " << v.name << ' ' << format_number(v.lower) << '\n';
      continue;
    }
    if (v.lower == v.upper) {
      out << " FX BND " << v.name << ' ' << format_number(v.lower) << '\n';
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << " FR BND " << v.name << '\n';
    } else {
      if (std::isinf(v.lower))
        out << " MI BND " << v.name << '\n';
      else if (v.lower != 0.0)
        out << " LO BND " << v.name << ' ' << format_number(v.lower) << '\n';
      if (!std::isinf(v.upper)) out << " UP BND " << v.name << ' ' << format_number(v.upper) << '\n';
    }
  }

  if (!model.sos_sets().empty()) {
    out << "SOS\n";
    for (const auto& set : model.sos_sets()) {
      out << (set.type == SosType::sos1 ? " S1" : " S2") << " SOS " << set.name << " 1\n";
      for (const auto& m : set.members)
        out << "    " << vars[static_cast<std::size_t>(m.var)].name << ' ' << format_number(m.weight) << '\n';
    }
  }
  out << "ENDATA\n";
}

std::string to_mps(const MilpModel& model) {
  std::ostringstream os;
  write_mps(model, os);
  return os.str();
}

void emit_mps(const MilpModel& model, const std::filesystem::path& path) {
  const auto problems = model.lint();
  if (!problems.empty()) throw Error("model fails lint: " + problems.front());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_mps(model, out);
  if (!out.flush()) throw Error("failed writing " + path.string());
}

}  // namespace valign
