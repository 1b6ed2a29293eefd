#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "valign/instance.hpp"
#include "valign/solver.hpp"
#include "valign/validator.hpp"

namespace valign {

/// (obj - benchmark) / benchmark. Throws Error when benchmark is 0.
double relative_error(double objective, double benchmark);

inline constexpr double kSuccessThreshold = 0.01;

/// |error| <= threshold, boundary included.
bool within_threshold(double error, double threshold = kSuccessThreshold);

struct ProfilePoint {
  double alpha = 1.0;
  double rho = 0.0;
};

struct ProfileCurve {
  std::string config;
  std::vector<ProfilePoint> points;  // ascending alpha

  /// Fraction of instances with ratio <= alpha.
  double rho_at(double alpha) const;
};

/// times[c][p] is the solve time of config c on instance p, or infinity when
/// the run failed. Ratios are taken against the fastest successful config
/// per instance; every curve is sampled at the union of finite ratios.
/// Throws Error when no run succeeded anywhere.
std::vector<ProfileCurve> performance_profile(const std::vector<std::string>& configs,
                                              const std::vector<std::vector<double>>& times);

// ---------------------------------------------------------------------------
// Instance generation

struct RoadTemplate {
  char name = 'A';
  double length_km = 1.0;
  double section_length = 20.0;
  int sections = 50;
};

/// The seven basic road shapes A..G.
const std::vector<RoadTemplate>& road_templates();
const RoadTemplate& road_template(char name);

struct GeneratorOptions {
  std::uint64_t seed = 1;
  std::string roads = "ABCDEFG";
  int per_road = 1;
  int min_blocks = 0, max_blocks = 3;
  int min_pits = 0, max_pits = 2;
  int max_access_roads = 2;
  int max_sections = 0;        // 0 keeps the template's count
  int segment_size = 10;       // sections per spline segment
  double offset_bound = 0.0;   // 0 draws one of 2, 3, 5 m
  bool volume_curves = false;
};

/// Deterministic synthetic roads: linear trend with |grade| <= 0.05 plus
/// smooth hills and bounded noise, so that a mass-balanced alignment within
/// the offset bounds exists. Ids look like "A-01".
std::vector<RoadInstance> generate_suite(const GeneratorOptions& options);

/// Writes one <name>.json per instance; returns the paths.
std::vector<std::filesystem::path> write_suite(const std::vector<RoadInstance>& suite, const std::filesystem::path& dir);

/// Reads every *.json instance in a directory, sorted by file name.
std::vector<RoadInstance> read_suite(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Matrix runs

/// Everything learned from one solve of one instance.
struct SolveOutcome {
  BuilderConfig config;  // after adapting to the solver
  std::string warning;
  Solution solution;
  std::optional<AlignmentResult> result;
  std::optional<ViolationReport> report;
  std::string message;

  /// Solution decoded, cost-consistent and validator-clean.
  bool accepted() const { return result.has_value() && report.has_value() && report->passed(); }
};

/// Build, solve, decode and validate (relative row scaling). Never throws
/// for solver-side problems; build errors propagate.
SolveOutcome solve_and_check(const RoadInstance& instance, BuilderConfig config, const SolverProfile& solver,
                             const SolverLimits& limits, const std::filesystem::path& work_dir,
                             double tolerance = 1e-6);

struct BenchmarkRecord {
  std::string instance;
  std::string config;
  bool blocks = false;          // instance has construction blocks
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;
  double wall_time = 0.0;
  bool validated = false;       // passed the validator and the cost recomputation
  std::string benchmark;        // config the error is measured against
  std::optional<double> relative_error;
  bool success = false;
  std::string message;

  bool solved() const { return has_solution(status) && validated; }
};

struct MatrixOptions {
  SolverProfile solver;
  SolverLimits limits;
  std::filesystem::path work_dir = "valign-work";
  int workers = 1;
  double validate_tolerance = 1e-6;
  /// Progress callback, called from worker threads under a lock.
  std::function<void(const BenchmarkRecord&)> on_record;
};

/// Runs every (instance, config) cell, validates each solution, then fills
/// in errors and success flags. Cell failures are recorded, never thrown.
/// Records come back ordered by (instance, config) as given.
std::vector<BenchmarkRecord> run_matrix(const std::vector<RoadInstance>& suite, const std::vector<std::string>& configs,
                                        const MatrixOptions& options);

/// Error and success columns from solved records. Benchmark per instance:
/// CTG (same block technique first) on block-free instances, MH-QNF on
/// block instances; MH-QNF runs whose benchmark has no solution get error 0.
void classify(std::vector<BenchmarkRecord>& records);

struct AccuracyRow {
  std::string config;
  int opt_found = 0;
  std::optional<double> min_err, mean_err, max_err;  // percent, over instances solved by both
};

std::vector<AccuracyRow> accuracy_summary(const std::vector<BenchmarkRecord>& records,
                                          const std::vector<std::string>& configs);

/// Profile over the records' configs and instances; failures count as
/// infinite time.
std::vector<ProfileCurve> profile_from_records(const std::vector<BenchmarkRecord>& records,
                                               const std::vector<std::string>& configs);

std::string times_csv(const std::vector<BenchmarkRecord>& records);
std::string records_csv(const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> parse_records_csv(const std::string& text);
std::string accuracy_csv(const std::vector<AccuracyRow>& rows);
std::string profile_csv(const std::vector<ProfileCurve>& curves);
std::string profile_svg(const std::vector<ProfileCurve>& curves);

/// Plain-text table: one row per config with solved and success counts
/// and the accuracy columns.
std::string summary_table(const std::vector<BenchmarkRecord>& records, const std::vector<std::string>& configs);

}  // namespace valign
