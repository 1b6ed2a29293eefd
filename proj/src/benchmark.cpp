#include "valign/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "valign/builder.hpp"
#include "valign/error.hpp"
#include "valign/instance_io.hpp"
#include "valign/mps.hpp"

namespace valign {

double relative_error(double objective, double benchmark) {
  if (benchmark == 0.0) throw Error("relative error is undefined for a zero benchmark objective");
  return (objective - benchmark) / benchmark;
}

bool within_threshold(double error, double threshold) { return std::abs(error) <= threshold; }

double ProfileCurve::rho_at(double alpha) const {
  double rho = 0.0;
  for (const ProfilePoint& p : points) {
    if (p.alpha > alpha) break;
    rho = p.rho;
  }
  return rho;
}

std::vector<ProfileCurve> performance_profile(const std::vector<std::string>& configs,
                                              const std::vector<std::vector<double>>& times) {
  if (configs.empty() || times.size() != configs.size()) throw Error("need one time row per config");
  const std::size_t np = times.front().size();
  if (np == 0) throw Error("need at least one instance");
  for (const auto& row : times)
    if (row.size() != np) throw Error("time rows differ in length");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> ratio(configs.size(), std::vector<double>(np, inf));
  bool any = false;
  for (std::size_t p = 0; p < np; ++p) {
    double best = inf;
    for (const auto& row : times)
      if (std::isfinite(row[p])) best = std::min(best, std::max(row[p], 1e-9));
    if (!std::isfinite(best)) continue;
    any = true;
    for (std::size_t c = 0; c < configs.size(); ++c)
      if (std::isfinite(times[c][p])) ratio[c][p] = std::max(times[c][p], 1e-9) / best;
  }
  if (!any) throw Error("no successful run on any instance");

  std::set<double> alphas{1.0};
  for (const auto& row : ratio)
    for (double r : row)
      if (std::isfinite(r)) alphas.insert(r);

  std::vector<ProfileCurve> curves;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    ProfileCurve curve{configs[c], {}};
    for (double a : alphas) {
      const auto hits = std::count_if(ratio[c].begin(), ratio[c].end(), [&](double r) { return r <= a; });
      curve.points.push_back({a, static_cast<double>(hits) / static_cast<double>(np)});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

// ---------------------------------------------------------------------------

const std::vector<RoadTemplate>& road_templates() {
  static const std::vector<RoadTemplate> templates = {
      {'A', 1, 20, 50},   {'B', 5, 100, 50},   {'C', 2, 20, 100}, {'D', 3, 20, 150},
      {'E', 15, 100, 150}, {'F', 20, 100, 200}, {'G', 9, 20, 450},
  };
  return templates;
}

const RoadTemplate& road_template(char name) {
  for (const auto& t : road_templates())
    if (t.name == name) return t;
  throw Error(std::string("unknown road template '") + name + "'");
}

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double between(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int pick(int lo, int hi) { return lo + std::min(hi - lo, static_cast<int>(unit() * (hi - lo + 1))); }

 private:
  std::mt19937_64 rng_;
};

/// `count` distinct values from [lo, hi], ascending.
std::vector<int> distinct(Draw& d, int count, int lo, int hi, const std::set<int>& avoid = {}) {
  std::vector<int> pool;
  for (int v = lo; v <= hi; ++v)
    if (!avoid.contains(v)) pool.push_back(v);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count && !pool.empty()) {
    const auto at = static_cast<std::size_t>(d.pick(0, static_cast<int>(pool.size()) - 1));
    out.push_back(pool[at]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RoadInstance generate_one(const RoadTemplate& tpl, int serial, const GeneratorOptions& opt, Draw& d) {
  RoadInstance inst;
  std::ostringstream name;
  name << tpl.name << '-' << std::setw(2) << std::setfill('0') << serial;
  inst.name = name.str();
  inst.costs = CostModel::standard();

  const int n = opt.max_sections > 0 ? std::min(opt.max_sections, tpl.sections) : tpl.sections;
  const double spacing = tpl.section_length;
  const double length = spacing * (n - 1);
  const double bound = opt.offset_bound > 0 ? opt.offset_bound : std::vector<double>{2, 3, 5}[static_cast<std::size_t>(d.pick(0, 2))];
  const double grade = d.between(-0.05, 0.05);
  const double width = d.between(8.0, 16.0);

  struct Hill {
    double amplitude, wavelength, phase;
  };
  std::vector<Hill> hills;
  for (int k = 0; k < 3; ++k)
    hills.push_back({0.45 * bound * d.unit() / 3.0, std::max(spacing * 4, length / d.between(0.5, 3.0)),
                     d.between(0.0, 2 * std::numbers::pi)});

  std::vector<double> relief(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = spacing * i;
    double r = 0.0;
    for (const Hill& h : hills) r += h.amplitude * std::sin(2 * std::numbers::pi * s / h.wavelength + h.phase);
    relief[static_cast<std::size_t>(i)] = r + 0.05 * bound * d.between(-1.0, 1.0);
  }
  const double base = d.between(50.0, 300.0);
  for (int i = 0; i < n; ++i) {
    Section s;
    s.index = i + 1;
    s.station = spacing * i;
    s.ground_elevation = base + grade * s.station + relief[static_cast<std::size_t>(i)];
    s.area = spacing * width;
    s.material = d.unit() < 0.7 ? 1 : d.pick(2, 4);
    s.offset_lo = -bound;
    s.offset_hi = bound;
    inst.sections.push_back(s);
  }

  const int seg = std::max(2, opt.segment_size);
  for (int left = n; left > 0;) {
    int take = std::min(seg, left);
    if (left - take == 1) ++take;
    inst.layout.segment_sizes.push_back(take);
    left -= take;
  }
  if (inst.layout.segment_sizes.size() > 1 && inst.layout.segment_sizes.back() < 2) {
    inst.layout.segment_sizes.pop_back();
    ++inst.layout.segment_sizes.back();
  }

  const int interior = std::max(0, n - 2);
  const int nblocks = std::min(d.pick(opt.min_blocks, std::max(opt.min_blocks, opt.max_blocks)), interior);
  for (int s : distinct(d, nblocks, 2, n - 1)) inst.blocks.push_back({s});
  std::set<int> block_set;
  for (const Block& b : inst.blocks) block_set.insert(b.section);
  int nroads = d.pick(0, std::max(0, opt.max_access_roads));
  if (nblocks > 0) nroads = std::max(nroads, 1);
  for (int s : distinct(d, nroads, 1, n, block_set)) inst.access_roads.push_back({s});

  const int npits = std::min(d.pick(opt.min_pits, std::max(opt.min_pits, opt.max_pits)), interior);
  for (int s : distinct(d, npits, 2, n - 1)) {
    Pit pit;
    pit.kind = d.unit() < 0.5 ? PitKind::borrow : PitKind::waste;
    pit.attached_section = s;
    pit.capacity = std::round(spacing * width * bound * d.between(1.0, 6.0));
    pit.dead_haul = std::round(d.between(50.0, 300.0));
    (pit.kind == PitKind::borrow ? inst.borrow_pits : inst.waste_pits).push_back(pit);
  }

  if (opt.volume_curves) {
    for (const Section& s : inst.sections) {
      VolumeCurve curve{s.index, {}};
      for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const double u = f * bound;
        const double c = s.area * std::max(u, 0.0) * (1.0 + 0.2 * std::max(u, 0.0) / bound);
        const double w = s.area * std::max(-u, 0.0) * (1.0 + 0.2 * std::max(-u, 0.0) / bound);
        curve.points.push_back({u, c, w});
      }
      inst.volume_curves.push_back(std::move(curve));
    }
  }
  return inst;
}

}  // namespace

std::vector<RoadInstance> generate_suite(const GeneratorOptions& options) {
  if (options.per_road < 1) throw Error("per_road must be >= 1");
  if (options.min_blocks < 0 || options.max_blocks < options.min_blocks) throw Error("bad block range");
  if (options.min_pits < 0 || options.max_pits < options.min_pits) throw Error("bad pit range");
  Draw d(options.seed);
  std::vector<RoadInstance> suite;
  for (char road : options.roads) {
    const RoadTemplate& tpl = road_template(road);
    for (int k = 1; k <= options.per_road; ++k) {
      RoadInstance inst = generate_one(tpl, k, options, d);
      require_valid(inst);
      suite.push_back(std::move(inst));
    }
  }
  return suite;
}

std::vector<std::filesystem::path> write_suite(const std::vector<RoadInstance>& suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const RoadInstance& inst : suite) {
    const auto path = dir / (inst.name + ".json");
    write_instance(inst, path);
    out.push_back(path);
  }
  return out;
}

std::vector<RoadInstance> read_suite(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<RoadInstance> suite;
  for (const auto& f : files) {
    RoadInstance inst = parse_instance(f);
    if (inst.name.empty()) inst.name = f.stem().string();
    suite.push_back(std::move(inst));
  }
  return suite;
}

// ---------------------------------------------------------------------------

SolveOutcome solve_and_check(const RoadInstance& instance, BuilderConfig config, const SolverProfile& solver,
                             const SolverLimits& limits, const std::filesystem::path& work_dir, double tolerance) {
  SolveOutcome out;
  out.config = adapt_to_solver(std::move(config), solver, &out.warning);
  const MilpModel model = build(instance, out.config);
  out.solution = solve(model, solver, limits, work_dir);
  out.message = out.solution.message;
  if (out.solution.values.empty()) return out;
  try {
    out.result = decode(out.solution, instance, out.config);
    out.report = validate(instance, out.config, *out.result, {tolerance, true});
    out.message = out.report->passed() ? std::string() : "validation failed";
  } catch (const Error& e) {
    out.result.reset();
    out.message = e.what();
  }
  return out;
}

std::vector<BenchmarkRecord> run_matrix(const std::vector<RoadInstance>& suite, const std::vector<std::string>& configs,
                                        const MatrixOptions& options) {
  if (suite.empty()) throw Error("empty suite");
  if (configs.empty()) throw Error("no configurations");
  for (const auto& c : configs) config_from_name(c);

  const std::size_t cells = suite.size() * configs.size();
  std::vector<BenchmarkRecord> records(cells);
  std::atomic<std::size_t> next{0};
  std::mutex lock;

  auto work = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      const RoadInstance& inst = suite[cell / configs.size()];
      const std::string& name = configs[cell % configs.size()];
      BenchmarkRecord rec;
      rec.instance = inst.name;
      rec.config = name;
      rec.blocks = !inst.blocks.empty();
      try {
        const SolveOutcome o = solve_and_check(inst, config_from_name(name), options.solver, options.limits,
                                               options.work_dir / inst.name / name, options.validate_tolerance);
        rec.status = o.solution.status;
        rec.objective = o.solution.objective;
        rec.wall_time = o.solution.wall_time;
        rec.validated = o.accepted();
        rec.message = o.message;
        if (!o.warning.empty()) rec.message = o.warning + (rec.message.empty() ? "" : "; " + rec.message);
      } catch (const std::exception& e) {
        rec.status = SolveStatus::error;
        rec.message = e.what();
      }
      std::lock_guard<std::mutex> guard(lock);
      records[cell] = rec;
      if (options.on_record) options.on_record(rec);
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(cells)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  classify(records);
  return records;
}

namespace {

std::string technique_of(const std::string& config) { return config.substr(config.find('-') + 1); }
std::string family_of(const std::string& config) { return config.substr(0, config.find('-')); }

}  // namespace

void classify(std::vector<BenchmarkRecord>& records) {
  std::map<std::pair<std::string, std::string>, const BenchmarkRecord*> by_cell;
  for (const auto& r : records) by_cell[{r.instance, r.config}] = &r;

  std::vector<std::pair<std::string, std::optional<double>>> computed(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const BenchmarkRecord& r = records[i];
    const std::string tech = technique_of(r.config);
    const std::string other = tech == "B" ? "S1" : "B";
    std::vector<std::string> candidates;
    if (!r.blocks) candidates = {"CTG-" + tech, "CTG-" + other};
    candidates.push_back("MQN-" + tech);
    candidates.push_back("MQN-" + other);

    const BenchmarkRecord* bench = nullptr;
    for (const auto& c : candidates) {
      const auto it = by_cell.find({r.instance, c});
      if (it != by_cell.end() && it->second->solved()) {
        bench = it->second;
        break;
      }
    }
    if (!r.solved()) continue;
    if (bench == nullptr || bench == &r) {
      if (family_of(r.config) == "MQN" || family_of(r.config) == "CTG") computed[i] = {r.config, 0.0};
      continue;
    }
    if (bench->objective == 0.0) {
      computed[i] = {bench->config, r.objective == 0.0 ? std::optional<double>(0.0) : std::nullopt};
      continue;
    }
    computed[i] = {bench->config, relative_error(r.objective, bench->objective)};
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].benchmark = computed[i].first;
    records[i].relative_error = computed[i].second;
    records[i].success = records[i].solved() && records[i].relative_error && within_threshold(*records[i].relative_error);
  }
}

std::vector<AccuracyRow> accuracy_summary(const std::vector<BenchmarkRecord>& records,
                                          const std::vector<std::string>& configs) {
  std::vector<AccuracyRow> rows;
  for (const auto& c : configs) {
    AccuracyRow row;
    row.config = c;
    std::vector<double> errs;
    for (const auto& r : records) {
      if (r.config != c) continue;
      if (r.solved()) ++row.opt_found;
      if (r.solved() && r.relative_error && r.benchmark != r.config) errs.push_back(100.0 * *r.relative_error);
    }
    if (!errs.empty()) {
      row.min_err = *std::min_element(errs.begin(), errs.end());
      row.max_err = *std::max_element(errs.begin(), errs.end());
      double sum = 0.0;
      for (double e : errs) sum += e;
      row.mean_err = sum / static_cast<double>(errs.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ProfileCurve> profile_from_records(const std::vector<BenchmarkRecord>& records,
                                               const std::vector<std::string>& configs) {
  std::vector<std::string> instances;
  for (const auto& r : records)
    if (std::find(instances.begin(), instances.end(), r.instance) == instances.end()) instances.push_back(r.instance);
  std::vector<std::vector<double>> times(configs.size(),
                                         std::vector<double>(instances.size(), std::numeric_limits<double>::infinity()));
  for (const auto& r : records) {
    const auto c = std::find(configs.begin(), configs.end(), r.config);
    if (c == configs.end() || !r.success) continue;
    const auto p = std::find(instances.begin(), instances.end(), r.instance);
    times[static_cast<std::size_t>(c - configs.begin())][static_cast<std::size_t>(p - instances.begin())] = r.wall_time;
  }
  return performance_profile(configs, times);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string fixed(double v, int digits) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

std::string times_csv(const std::vector<BenchmarkRecord>& records) {
  std::ostringstream os;
  os << "instance,config,status,seconds\n";
  for (const auto& r : records)
    os << csv_field(r.instance) << ',' << r.config << ',' << to_string(r.status) << ','
       << (r.status == SolveStatus::timeout ? std::string("NaN") : fixed(r.wall_time, 3)) << '\n';
  return os.str();
}

std::string records_csv(const std::vector<BenchmarkRecord>& records) {
  std::ostringstream os;
  os << "instance,config,blocks,status,objective,seconds,validated,benchmark,relative_error,success,message\n";
  for (const auto& r : records)
    os << csv_field(r.instance) << ',' << r.config << ',' << (r.blocks ? 1 : 0) << ',' << to_string(r.status) << ','
       << format_number(r.objective)
       << ',' << format_number(r.wall_time) << ',' << (r.validated ? 1 : 0) << ',' << r.benchmark << ','
       << (r.relative_error ? format_number(*r.relative_error) : std::string()) << ',' << (r.success ? 1 : 0) << ','
       << csv_field(one_line(r.message)) << '\n';
  return os.str();
}

std::vector<BenchmarkRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("instance,config,blocks,status", 0) != 0) throw Error("not a records CSV");
  std::vector<BenchmarkRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) throw Error("records CSV row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    BenchmarkRecord r;
    try {
      r.instance = f[0];
      r.config = f[1];
      r.blocks = f[2] == "1";
      r.status = solve_status_from_string(f[3]);
      r.objective = std::stod(f[4]);
      r.wall_time = std::stod(f[5]);
      r.validated = f[6] == "1";
      r.benchmark = f[7];
      if (!f[8].empty()) r.relative_error = std::stod(f[8]);
      r.success = f[9] == "1";
      r.message = f[10];
    } catch (const std::invalid_argument&) {
      throw Error("records CSV row " + std::to_string(row) + " has a bad number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream os;
  os << "config,opt_found,min_err,mean_err,max_err\n";
  auto cell = [](const std::optional<double>& v) { return v ? fixed(*v, 2) : std::string(); };
  for (const auto& r : rows)
    os << r.config << ',' << r.opt_found << ',' << cell(r.min_err) << ',' << cell(r.mean_err) << ',' << cell(r.max_err)
       << '\n';
  return os.str();
}

std::string profile_csv(const std::vector<ProfileCurve>& curves) {
  std::ostringstream os;
  os << "config,alpha,rho\n";
  for (const auto& c : curves)
    for (const auto& p : c.points) os << c.config << ',' << format_number(p.alpha) << ',' << format_number(p.rho) << '\n';
  return os.str();
}

std::string profile_svg(const std::vector<ProfileCurve>& curves) {
  const double w = 640, h = 400, pad = 50;
  double max_alpha = 1.0;
  for (const auto& c : curves)
    for (const auto& p : c.points) max_alpha = std::max(max_alpha, p.alpha);
  const double span = std::log2(max_alpha) > 0 ? std::log2(max_alpha) : 1.0;
  auto x = [&](double a) { return pad + (w - 2 * pad) * std::log2(a) / span; };
  auto y = [&](double r) { return h - pad - (h - 2 * pad) * r; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                 "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000", "#aec7e8"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">log2(alpha)</text>\n";
  os << "<text x=\"12\" y=\"" << h / 2 << "\" transform=\"rotate(-90 12 " << h / 2 << ")\" text-anchor=\"middle\">rho</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = colors[c % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    double prev = 0.0;
    for (const auto& p : curves[c].points) {
      os << fixed(x(p.alpha), 1) << ',' << fixed(y(prev), 1) << ' ' << fixed(x(p.alpha), 1) << ',' << fixed(y(p.rho), 1)
         << ' ';
      prev = p.rho;
    }
    os << fixed(x(max_alpha), 1) << ',' << fixed(y(prev), 1) << "\"/>\n";
    os << "<text x=\"" << w - pad + 5 << "\" y=\"" << pad + 16 * static_cast<double>(c) << "\" fill=\"" << color
       << "\" font-size=\"12\">" << curves[c].config << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string summary_table(const std::vector<BenchmarkRecord>& records, const std::vector<std::string>& configs) {
  const auto rows = accuracy_summary(records, configs);
  std::ostringstream os;
  os << std::left << std::setw(8) << "config" << std::right << std::setw(8) << "solved" << std::setw(9) << "success"
     << std::setw(9) << "timeout" << std::setw(10) << "min%" << std::setw(10) << "mean%" << std::setw(10) << "max%"
     << '\n';
  auto cell = [](const std::optional<double>& v) { return v ? fixed(*v, 2) : std::string("--"); };
  for (const auto& row : rows) {
    int success = 0, timeouts = 0;
    for (const auto& r : records) {
      if (r.config != row.config) continue;
      success += r.success ? 1 : 0;
      timeouts += r.status == SolveStatus::timeout ? 1 : 0;
    }
    os << std::left << std::setw(8) << row.config << std::right << std::setw(8) << row.opt_found << std::setw(9) << success
       << std::setw(9) << timeouts << std::setw(10) << cell(row.min_err) << std::setw(10) << cell(row.mean_err)
       << std::setw(10) << cell(row.max_err) << '\n';
  }
  return os.str();
}

}  // namespace valign
