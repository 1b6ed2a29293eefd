// valign: build, solve, check and benchmark vertical alignment models.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "valign/benchmark.hpp"
#include "valign/builder.hpp"
#include "valign/error.hpp"
#include "valign/instance_io.hpp"
#include "valign/mps.hpp"
#include "valign/oracle.hpp"
#include "valign/solver.hpp"

namespace fs = std::filesystem;
using namespace valign;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kSolverFailed = 3, kTimeout = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string config_name;
  std::string model = "mhqnf";
  std::string haul;
  std::string blocks = "basic";
  std::string volumes = "linear";
  std::string costs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config-name", config_name, "Named configuration, e.g. MQN-B or QNA-S1 (overrides --model)");
    cmd->add_option("--model", model, "mhqnf, qnf or ctg")->check(CLI::IsMember({"mhqnf", "qnf", "ctg"}));
    cmd->add_option("--haul", haul, "S, M, L or avg; required for qnf, restricts mhqnf to one haul class")
        ->check(CLI::IsMember({"S", "M", "L", "avg"}));
    cmd->add_option("--blocks", blocks, "Block technique")->check(CLI::IsMember({"basic", "sos1"}));
    cmd->add_option("--volumes", volumes, "Volume mode")->check(CLI::IsMember({"linear", "sos2", "binary"}));
    cmd->add_option("--costs", costs, "Cost file replacing the instance's materials and hauls")->check(CLI::ExistingFile);
  }

  BuilderConfig config() const {
    BuilderConfig cfg;
    if (!config_name.empty()) {
      cfg = config_from_name(config_name);
    } else {
      const std::string tech = blocks == "basic" ? "B" : "S1";
      if (model == "ctg") {
        cfg = config_from_name("CTG-" + tech);
      } else if (model == "qnf") {
        if (haul.empty()) throw UsageError("--model qnf needs --haul");
        cfg = config_from_name("QN" + std::string(1, haul[0] == 'a' ? 'A' : haul[0]) + "-" + tech);
      } else {
        cfg = config_from_name("MQN-" + tech);
        if (!haul.empty()) {
          if (haul == "avg") throw UsageError("--haul avg only applies to --model qnf");
          cfg.haul_subset = {qnf_pseudo_haul(haul[0])};
        }
      }
    }
    cfg.volume_mode = volumes == "sos2" ? VolumeMode::piecewise_sos2
                      : volumes == "binary" ? VolumeMode::piecewise_binary
                                            : VolumeMode::linear;
    return cfg;
  }

  RoadInstance load(const std::string& path) const {
    RoadInstance inst = parse_instance(path);
    if (!costs.empty()) {
      inst.costs = parse_cost_model_text(read_text_file(costs));
      require_valid(inst);
    }
    return inst;
  }
};

struct SolverFlags {
  std::string tool_config;
  std::string command;
  std::string format;
  std::optional<bool> sos;
  std::optional<double> time_limit, gap, feastol;
  std::optional<double> kill_grace;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tool-config", tool_config, "JSON tool configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--solver-cmd", command, "Solver command template (default: $VALIGN_SOLVER_CMD)");
    cmd->add_option("--solver-format", format, "Solution layout: cbc, pairs or xml");
    cmd->add_option("--sos", sos, "Whether the solver accepts SOS sets");
    cmd->add_option("--time-limit", time_limit, "Seconds per solve")->check(CLI::PositiveNumber);
    cmd->add_option("--gap", gap, "Relative MIP gap")->check(CLI::PositiveNumber);
    cmd->add_option("--feastol", feastol, "Feasibility tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--kill-grace", kill_grace, "Seconds past the time limit before the solver is killed")
        ->check(CLI::NonNegativeNumber);
  }

  ToolConfig file_config() const { return tool_config.empty() ? ToolConfig{} : parse_tool_config(tool_config); }

  SolverProfile profile(const ToolConfig& file) const {
    std::optional<SolverProfile> p;
    if (!command.empty())
      p = profile_from_command(command);
    else if (!file.solver_command.empty())
      p = profile_from_command(file.solver_command);
    else
      p = profile_from_environment();
    if (!p) throw UsageError("no solver: pass --solver-cmd or set VALIGN_SOLVER_CMD");
    const std::string fmt = !format.empty() ? format : file.solver_format;
    if (!fmt.empty()) p->layout = solution_layout_from_string(fmt);
    if (sos)
      p->supports_sos = *sos;
    else if (file.solver_sos >= 0)
      p->supports_sos = file.solver_sos == 1;
    if (kill_grace)
      p->kill_grace = *kill_grace;
    else if (file.kill_grace >= 0)
      p->kill_grace = file.kill_grace;
    return *p;
  }

  SolverLimits limits(const ToolConfig& file) const {
    SolverLimits l = file.limits;
    if (time_limit) l.time_limit = *time_limit;
    if (gap) l.mip_gap = *gap;
    if (feastol) l.feasibility_tol = *feastol;
    return l;
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_stats(const MilpModel& m) {
  std::cout << "variables " << m.variables().size() << " constraints " << m.constraints().size() << " binaries "
            << m.binary_count() << " sos " << m.sos_sets().size() << '\n';
}

int cmd_validate(const std::string& path, const ModelFlags& flags) {
  const RoadInstance inst = flags.load(path);
  std::cout << "ok " << (inst.name.empty() ? path : inst.name) << ": " << inst.section_count() << " sections, "
            << inst.layout.segment_count() << " segments, " << inst.blocks.size() << " blocks, "
            << inst.borrow_pits.size() << " borrow pits, " << inst.waste_pits.size() << " waste pits\n";
  return kOk;
}

int cmd_build(const std::string& path, const ModelFlags& flags, const std::string& out) {
  const BuilderConfig cfg = flags.config();
  const RoadInstance inst = flags.load(path);
  const MilpModel model = build(inst, cfg);
  emit_mps(model, out);
  std::cout << cfg.name << ' ';
  print_stats(model);
  return kOk;
}

int cmd_solve(const std::string& path, const ModelFlags& flags, const SolverFlags& sflags, const std::string& out,
              std::string work) {
  const BuilderConfig cfg = flags.config();
  const ToolConfig file = sflags.file_config();
  const SolverProfile profile = sflags.profile(file);
  const SolverLimits limits = sflags.limits(file);
  const RoadInstance inst = flags.load(path);
  if (work.empty()) work = out + ".work";

  const SolveOutcome o = solve_and_check(inst, cfg, profile, limits, work);
  if (!o.warning.empty()) std::cerr << "warning: " << o.warning << '\n';
  std::cout << "config " << o.config.name << "\nstatus " << to_string(o.solution.status) << "\nobjective "
            << format_number(o.solution.objective) << "\nseconds " << format_number(o.solution.wall_time) << '\n';
  if (o.result) write_text_file(out, result_to_json(*o.result));
  if (o.report) std::cout << o.report->summary();
  if (!o.accepted() && !o.message.empty()) std::cerr << o.message << '\n';
  std::cerr << "solver log: " << o.solution.solver_log_path << '\n';

  if (o.solution.status == SolveStatus::timeout) return kTimeout;
  if (!has_solution(o.solution.status)) return kSolverFailed;
  if (!o.result) return kSolverFailed;
  return o.accepted() ? kOk : kInvalid;
}

int cmd_oracle(const std::string& path, const ModelFlags& flags, const std::string& offsets, const std::string& grid) {
  const RoadInstance inst = flags.load(path);
  if (offsets.empty() == grid.empty()) throw UsageError("pass exactly one of --offsets or --grid");
  if (!offsets.empty()) {
    const std::vector<double> u = parse_list(offsets);
    if (static_cast<int>(u.size()) != inst.section_count())
      throw UsageError("--offsets needs " + std::to_string(inst.section_count()) + " values");
    std::vector<double> cut{0.0}, fill{0.0};
    for (int i = 1; i <= inst.section_count(); ++i) {
      const double a = inst.section(i).area * u[static_cast<std::size_t>(i - 1)];
      cut.push_back(std::max(a, 0.0));
      fill.push_back(std::max(-a, 0.0));
    }
    const TransportPlan plan = solve_transportation(transportation_for(inst, cut, fill));
    for (const Shipment& s : plan.shipments)
      std::cout << "ship " << s.from << ' ' << s.to << ' ' << format_number(s.volume) << '\n';
    std::cout << "cost " << format_number(fixed_offset_cost(inst, u)) << '\n';
    return kOk;
  }
  const std::vector<double> candidates = parse_list(grid);
  const EnumerationResult r =
      enumerate_optimal(inst, std::vector<std::vector<double>>(static_cast<std::size_t>(inst.section_count()), candidates));
  std::cout << "combinations " << r.combinations << "\nfeasible " << r.feasible_combinations << '\n';
  if (!r.feasible) {
    std::cout << "no feasible combination\n";
    return kSolverFailed;
  }
  std::cout << "offsets";
  for (double u : r.offsets) std::cout << ' ' << format_number(u);
  std::cout << "\ncost " << format_number(r.cost) << '\n';
  return kOk;
}

void write_reports(const std::vector<BenchmarkRecord>& records, const std::vector<std::string>& configs,
                   const fs::path& out) {
  fs::create_directories(out);
  write_text_file(out / "records.csv", records_csv(records));
  write_text_file(out / "times.csv", times_csv(records));
  write_text_file(out / "accuracy.csv", accuracy_csv(accuracy_summary(records, configs)));
  try {
    const auto curves = profile_from_records(records, configs);
    write_text_file(out / "profile.csv", profile_csv(curves));
    write_text_file(out / "profile.svg", profile_svg(curves));
  } catch (const Error& e) {
    std::cerr << "profile skipped: " << e.what() << '\n';
  }
  std::cout << summary_table(records, configs);
}

std::vector<std::string> configs_in(const std::vector<BenchmarkRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records)
    if (std::find(out.begin(), out.end(), r.config) == out.end()) out.push_back(r.config);
  return out;
}

int cmd_bench(const std::string& suite_dir, const SolverFlags& sflags, std::string configs, int workers,
              const std::string& out) {
  const ToolConfig file = sflags.file_config();
  std::vector<std::string> names = configs.empty() ? file.configs : split_names(configs);
  if (names.empty()) names = standard_config_names();
  for (const auto& n : names) config_from_name(n);
  MatrixOptions opt;
  opt.solver = sflags.profile(file);
  opt.limits = sflags.limits(file);
  opt.work_dir = fs::path(out) / "work";
  opt.workers = workers > 0 ? workers : (file.workers > 0 ? file.workers : 1);
  opt.on_record = [](const BenchmarkRecord& r) {
    std::cerr << r.instance << ' ' << r.config << ' ' << to_string(r.status) << ' ' << format_number(r.wall_time)
              << "s" << (r.validated ? "" : " (not validated)") << '\n';
  };
  const std::vector<RoadInstance> suite = read_suite(suite_dir);
  if (suite.empty()) throw UsageError("no instances in " + suite_dir);
  const auto records = run_matrix(suite, names, opt);
  write_reports(records, names, out);
  std::ostringstream who;
  who << "solver " << opt.solver.name << "\ncommand " << opt.solver.command << "\nlayout "
      << to_string(opt.solver.layout) << "\ntime_limit " << format_number(opt.limits.time_limit) << "\nmip_gap "
      << format_number(opt.limits.mip_gap) << "\nfeasibility_tol " << format_number(opt.limits.feasibility_tol)
      << '\n';
  write_text_file(fs::path(out) / "solver.txt", who.str());
  return kOk;
}

int cmd_profile(const std::string& records_path, std::string configs, const std::string& out) {
  const auto records = parse_records_csv(read_text_file(records_path));
  const auto names = configs.empty() ? configs_in(records) : split_names(configs);
  const auto curves = profile_from_records(records, names);
  fs::create_directories(out);
  write_text_file(fs::path(out) / "profile.csv", profile_csv(curves));
  write_text_file(fs::path(out) / "profile.svg", profile_svg(curves));
  std::cout << profile_csv(curves);
  return kOk;
}

int cmd_report(const std::string& records_path, const std::string& out) {
  auto records = parse_records_csv(read_text_file(records_path));
  classify(records);
  const auto names = configs_in(records);
  if (out.empty())
    std::cout << summary_table(records, names);
  else
    write_reports(records, names, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertical road alignment and earthwork MILP tool"};
  app.require_subcommand(1);

  ModelFlags mflags;
  SolverFlags sflags;
  std::string instance, out, work, offsets, grid, suite, configs, records;
  int workers = 0;

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("instance", instance)->required()->check(CLI::ExistingFile);
  validate->add_option("--costs", mflags.costs, "Cost file replacing the instance's costs")->check(CLI::ExistingFile);

  auto* build_cmd = app.add_subcommand("build", "Write the MILP of an instance as MPS");
  build_cmd->add_option("instance", instance)->required()->check(CLI::ExistingFile);
  mflags.attach(build_cmd);
  build_cmd->add_option("-o,--output", out, "MPS output path")->required();

  auto* solve_cmd = app.add_subcommand("solve", "Build, solve, decode and validate");
  solve_cmd->add_option("instance", instance)->required()->check(CLI::ExistingFile);
  mflags.attach(solve_cmd);
  sflags.attach(solve_cmd);
  solve_cmd->add_option("-o,--output", out, "Result JSON path")->required();
  solve_cmd->add_option("--work-dir", work, "Directory for model, solution and solver log (default: <output>.work)");

  auto* oracle = app.add_subcommand("oracle", "Transportation cost at fixed offsets, or exhaustive search");
  oracle->add_option("instance", instance)->required()->check(CLI::ExistingFile);
  oracle->add_option("--costs", mflags.costs)->check(CLI::ExistingFile);
  oracle->add_option("--offsets", offsets, "Comma-separated offset per section");
  oracle->add_option("--grid", grid, "Comma-separated candidate offsets, shared by all sections");

  auto* bench = app.add_subcommand("bench", "Run a configuration matrix over a suite");
  bench->add_option("suite", suite, "Directory of instance files")->required()->check(CLI::ExistingDirectory);
  sflags.attach(bench);
  bench->add_option("--configs", configs, "Comma-separated configuration names (default: all twelve)");
  bench->add_option("--workers", workers, "Parallel solver processes")->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out, "Report directory")->required();

  auto* profile = app.add_subcommand("profile", "Performance profile from a records CSV");
  profile->add_option("records", records)->required()->check(CLI::ExistingFile);
  profile->add_option("--configs", configs, "Comma-separated configuration names (default: all in the file)");
  profile->add_option("--out", out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Summary table and accuracy from a records CSV");
  report->add_option("records", records)->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "Also rewrite the CSV reports into this directory");

  GeneratorOptions gen;
  std::string block_range, pit_range;
  auto* generate = app.add_subcommand("generate", "Write a seeded synthetic suite");
  generate->add_option("--out", out, "Suite directory")->required();
  generate->add_option("--seed", gen.seed);
  generate->add_option("--roads", gen.roads, "Road templates, e.g. ABCDEFG");
  generate->add_option("--per-road", gen.per_road)->check(CLI::PositiveNumber);
  generate->add_option("--min-blocks", gen.min_blocks)->check(CLI::NonNegativeNumber);
  generate->add_option("--max-blocks", gen.max_blocks)->check(CLI::NonNegativeNumber);
  generate->add_option("--min-pits", gen.min_pits)->check(CLI::NonNegativeNumber);
  generate->add_option("--max-pits", gen.max_pits)->check(CLI::NonNegativeNumber);
  generate->add_option("--max-access-roads", gen.max_access_roads)->check(CLI::NonNegativeNumber);
  generate->add_option("--max-sections", gen.max_sections, "Cap on sections per road (0 keeps the template)")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--segment-size", gen.segment_size)->check(CLI::Range(2, 1000000));
  generate->add_option("--offset-bound", gen.offset_bound)->check(CLI::NonNegativeNumber);
  generate->add_flag("--volume-curves", gen.volume_curves);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(instance, mflags);
    if (*build_cmd) return cmd_build(instance, mflags, out);
    if (*solve_cmd) return cmd_solve(instance, mflags, sflags, out, work);
    if (*oracle) return cmd_oracle(instance, mflags, offsets, grid);
    if (*bench) return cmd_bench(suite, sflags, configs, workers, out);
    if (*profile) return cmd_profile(records, configs, out);
    if (*report) return cmd_report(records, out);
    if (*generate) {
      const auto paths = write_suite(generate_suite(gen), out);
      std::cout << "wrote " << paths.size() << " instances to " << out << '\n';
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const InstanceError& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
