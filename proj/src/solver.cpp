#include "valign/solver.hpp"

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>
#include <fcntl.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "valign/error.hpp"
#include "valign/mps.hpp"

namespace valign {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::timeout: return "timeout";
    case SolveStatus::error: return "error";
  }
  return "error";
}

SolveStatus solve_status_from_string(const std::string& text) {
  for (auto s : {SolveStatus::optimal, SolveStatus::feasible, SolveStatus::infeasible, SolveStatus::timeout,
                 SolveStatus::error})
    if (to_string(s) == text) return s;
  throw Error("unknown solve status " + text);
}

std::string to_string(SolutionLayout layout) {
  switch (layout) {
    case SolutionLayout::cbc: return "cbc";
    case SolutionLayout::pairs: return "pairs";
    case SolutionLayout::xml: return "xml";
  }
  return "cbc";
}

SolutionLayout solution_layout_from_string(const std::string& text) {
  if (text == "cbc") return SolutionLayout::cbc;
  if (text == "pairs" || text == "scip" || text == "highs") return SolutionLayout::pairs;
  if (text == "xml" || text == "cplex") return SolutionLayout::xml;
  throw Error("unknown solution layout " + text);
}

SolverProfile cbc_profile(const std::string& executable) {
  SolverProfile p;
  p.name = "cbc";
  p.command = executable + " {mps} sec {timelimit} ratio {gap} primalT {feastol} {sosopts} printingOptions all solve solu {sol}";
  // CBC preprocessing can return a fractional binary as optimal on models with SOS1 sets.
  p.sos_options = "preprocess off";
  p.layout = SolutionLayout::cbc;
  p.supports_sos = true;
  return p;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument(text);
  return v;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string replace_all(std::string text, const std::string& token, const std::string& value) {
  for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
    text.replace(pos, token.size(), value);
  return text;
}

Solution parse_cbc(std::istream& in) {
  Solution sol;
  std::string line;
  if (!std::getline(in, line)) throw DecodeError("empty CBC solution file");
  const std::string head = lower(line);
  const auto at = head.find("objective value");
  if (at != std::string::npos) {
    try {
      sol.objective = parse_double(trim(line.substr(at + 15)));
    } catch (const std::exception&) {
      throw DecodeError("bad objective in CBC header: " + line);
    }
  }
  if (head.starts_with("optimal"))
    sol.status = SolveStatus::optimal;
  else if (head.starts_with("infeasible") || head.starts_with("integer infeasible"))
    sol.status = SolveStatus::infeasible;
  else if (head.starts_with("stopped on time"))
    sol.status = SolveStatus::timeout;
  else
    sol.status = SolveStatus::error;
  sol.message = trim(line);

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> parts;
    while (ls >> tok) parts.push_back(tok);
    if (parts.empty()) continue;
    std::size_t o = parts[0] == "**" ? 1 : 0;
    if (parts.size() < o + 3) throw DecodeError("bad CBC solution line: " + line);
    try {
      sol.values[parts[o + 1]] = parse_double(parts[o + 2]);
    } catch (const std::exception&) {
      throw DecodeError("bad CBC solution line: " + line);
    }
  }
  // A stop without incumbent reports a huge sentinel objective or the LP relaxation.
  if (sol.status == SolveStatus::infeasible || std::abs(sol.objective) > 1e40 ||
      head.find("no integer solution") != std::string::npos)
    sol.values.clear();
  return sol;
}

SolveStatus status_from_words(const std::string& text) {
  const std::string s = lower(text);
  if (s.find("infeasible") != std::string::npos) return SolveStatus::infeasible;
  if (s.find("time") != std::string::npos) return SolveStatus::timeout;
  if (s.find("optimal") != std::string::npos) return SolveStatus::optimal;
  if (s.find("feasible") != std::string::npos) return SolveStatus::feasible;
  return SolveStatus::error;
}

Solution parse_pairs(std::istream& in) {
  Solution sol;
  sol.sparse = true;
  sol.status = SolveStatus::feasible;
  std::string line;
  bool seen_status = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string l = lower(t);
    if (l.starts_with("solution status:")) {
      sol.status = status_from_words(t.substr(16));
      sol.message = trim(t.substr(16));
      seen_status = true;
      continue;
    }
    if (l.starts_with("objective value:")) {
      try {
        sol.objective = parse_double(trim(t.substr(16)));
      } catch (const std::exception&) {
        throw DecodeError("bad objective line: " + line);
      }
      continue;
    }
    std::istringstream ls(t);
    std::string name, value;
    if (!(ls >> name >> value)) throw DecodeError("bad solution line: " + line);
    try {
      sol.values[name] = parse_double(value);
    } catch (const std::exception&) {
      throw DecodeError("bad solution line: " + line);
    }
  }
  if (!seen_status && sol.values.empty()) sol.status = SolveStatus::error;
  if (sol.status == SolveStatus::infeasible) sol.values.clear();
  return sol;
}

std::string attribute(const std::string& tag, const std::string& key) {
  const std::regex re("\\b" + key + "\\s*=\\s*\"([^\"]*)\"");
  std::smatch m;
  if (std::regex_search(tag, m, re)) return m[1].str();
  return {};
}

Solution parse_xml(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Solution sol;
  sol.sparse = true;
  const std::regex tag_re("<(header|variable)\\b([^>]*)/?>");
  bool seen_header = false;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tag_re); it != std::sregex_iterator(); ++it) {
    const std::string kind = (*it)[1].str();
    const std::string attrs = (*it)[2].str();
    try {
      if (kind == "header") {
        seen_header = true;
        const std::string obj = attribute(attrs, "objectiveValue");
        if (!obj.empty()) sol.objective = parse_double(obj);
        sol.message = attribute(attrs, "solutionStatusString");
        sol.status = status_from_words(sol.message);
      } else {
        const std::string name = attribute(attrs, "name");
        const std::string value = attribute(attrs, "value");
        if (name.empty() || value.empty()) throw DecodeError("variable tag without name or value");
        sol.values[name] = parse_double(value);
      }
    } catch (const DecodeError&) {
      throw;
    } catch (const std::exception&) {
      throw DecodeError("bad number in solution XML");
    }
  }
  if (!seen_header) throw DecodeError("solution XML has no header");
  if (sol.status == SolveStatus::infeasible) sol.values.clear();
  return sol;
}

std::string tail_of(const std::filesystem::path& path, std::size_t lines) {
  std::ifstream in(path);
  std::vector<std::string> all;
  std::string line;
  while (std::getline(in, line)) all.push_back(line);
  std::string out;
  for (std::size_t i = all.size() > lines ? all.size() - lines : 0; i < all.size(); ++i) out += all[i] + "\n";
  return out;
}

}  // namespace

SolverProfile profile_from_command(const std::string& command) {
  SolverProfile p;
  p.command = command;
  const std::string c = lower(command);
  if (c.find("highs") != std::string::npos) {
    p.name = "highs";
    p.layout = SolutionLayout::pairs;
    p.supports_sos = false;
  } else if (c.find("scip") != std::string::npos) {
    p.name = "scip";
    p.layout = SolutionLayout::pairs;
  } else if (c.find("cplex") != std::string::npos) {
    p.name = "cplex";
    p.layout = SolutionLayout::xml;
  } else if (c.find("cbc") != std::string::npos) {
    p.name = "cbc";
    p.layout = SolutionLayout::cbc;
    p.sos_options = "preprocess off";
  }
  return p;
}

std::optional<SolverProfile> profile_from_environment() {
  const char* cmd = std::getenv("VALIGN_SOLVER_CMD");
  if (cmd == nullptr || *cmd == '\0') return std::nullopt;
  SolverProfile p = profile_from_command(cmd);
  if (const char* fmt = std::getenv("VALIGN_SOLVER_FORMAT"); fmt != nullptr && *fmt != '\0')
    p.layout = solution_layout_from_string(fmt);
  if (const char* sos = std::getenv("VALIGN_SOLVER_SOS"); sos != nullptr && *sos != '\0')
    p.supports_sos = std::string(sos) != "0";
  return p;
}

Solution parse_solution(std::istream& in, SolutionLayout layout) {
  switch (layout) {
    case SolutionLayout::cbc: return parse_cbc(in);
    case SolutionLayout::pairs: return parse_pairs(in);
    case SolutionLayout::xml: return parse_xml(in);
  }
  throw DecodeError("unknown layout");
}

Solution parse_solution_file(const std::filesystem::path& path, SolutionLayout layout) {
  std::ifstream in(path);
  if (!in) throw DecodeError("cannot read solution file " + path.string());
  return parse_solution(in, layout);
}

Solution solve(const MilpModel& model, const SolverProfile& profile, const SolverLimits& limits,
               const std::filesystem::path& work_dir) {
  namespace fs = std::filesystem;
  Solution result;
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  if (profile.command.empty()) {
    result.message = "no solver command configured";
    return result;
  }
  if (!(limits.time_limit > 0) || !(limits.mip_gap > 0) || !(limits.feasibility_tol > 0)) {
    result.message = "solver limits must be positive";
    return result;
  }

  std::error_code ec;
  fs::create_directories(work_dir, ec);
  const fs::path mps = work_dir / "model.mps";
  const fs::path sol = work_dir / "model.sol";
  const fs::path log = work_dir / "solver.log";
  fs::remove(sol, ec);
  result.solver_log_path = log.string();
  try {
    emit_mps(model, mps);
  } catch (const Error& e) {
    result.message = e.what();
    return result;
  }

  std::string cmd = profile.command;
  cmd = replace_all(cmd, "{mps}", shell_quote(mps.string()));
  cmd = replace_all(cmd, "{sol}", shell_quote(sol.string()));
  cmd = replace_all(cmd, "{timelimit}", format_number(limits.time_limit));
  cmd = replace_all(cmd, "{gap}", format_number(limits.mip_gap));
  cmd = replace_all(cmd, "{feastol}", format_number(limits.feasibility_tol));
  cmd = replace_all(cmd, "{sosopts}", model.sos_sets().empty() ? std::string() : profile.sos_options);

  const pid_t pid = fork();
  if (pid < 0) {
    result.message = "fork failed";
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);
    const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
      close(fd);
    }
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  const double deadline = limits.time_limit + profile.kill_grace;
  int wstatus = 0;
  bool killed = false;
  for (;;) {
    const pid_t r = waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0) {
      result.message = "waitpid failed";
      result.wall_time = elapsed();
      return result;
    }
    if (elapsed() > deadline) {
      killpg(pid, SIGKILL);
      waitpid(pid, &wstatus, 0);
      killed = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  result.wall_time = elapsed();

  if (killed) {
    result.status = SolveStatus::timeout;
    result.message = "solver killed after " + format_number(deadline) + " s";
    return result;
  }
  if (!fs::exists(sol)) {
    result.status = SolveStatus::error;
    const int code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : -1;
    result.message = "solver produced no solution file (exit " + std::to_string(code) + ")\n" + tail_of(log, 10);
    return result;
  }
  try {
    Solution parsed = parse_solution_file(sol, profile.layout);
    parsed.wall_time = result.wall_time;
    parsed.solver_log_path = result.solver_log_path;
    if (parsed.status == SolveStatus::optimal && parsed.values.empty() && !parsed.sparse) {
      parsed.status = SolveStatus::error;
      parsed.message = "optimal status without values";
    }
    return parsed;
  } catch (const Error& e) {
    result.status = SolveStatus::error;
    result.message = e.what();
    return result;
  }
}

BuilderConfig adapt_to_solver(BuilderConfig config, const SolverProfile& profile, std::string* warning) {
  if (profile.supports_sos) return config;
  std::string note;
  if (config.volume_mode == VolumeMode::piecewise_sos2) {
    config.volume_mode = VolumeMode::piecewise_binary;
    note += "solver " + profile.name + " has no SOS support; piecewise volumes use the binary formulation";
  }
  if (config.block_technique == BlockTechnique::sos1) {
    config.block_technique = BlockTechnique::basic;
    if (!note.empty()) note += "; ";
    note += "solver " + profile.name + " has no SOS support; blocks use big-M rows";
  }
  if (warning != nullptr) *warning = note;
  return config;
}

}  // namespace valign
