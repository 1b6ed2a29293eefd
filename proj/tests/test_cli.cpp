// Drives the valign executable as a subprocess.

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>

#include "support.hpp"
#include "valign/benchmark.hpp"
#include "valign/instance_io.hpp"

using namespace valign;
using valign::testing::scratch;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs `valign <args>` with stderr folded into the output and no solver in
/// the environment.
Run run(const std::string& args) {
  const std::string cmd = "env -u VALIGN_SOLVER_CMD -u VALIGN_SOLVER_FORMAT " + quote(VALIGN_EXE) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.output += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string solver_args() {
  const auto cbc = valign::testing::test_solver();
  return "--solver-cmd " + quote(cbc->command) + " --solver-format cbc";
}

std::filesystem::path write(const RoadInstance& inst, const std::filesystem::path& dir) {
  const auto path = dir / (inst.name + ".json");
  write_instance(inst, path);
  return path;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("build /nonexistent.json -o x.mps").code == 2);
}

TEST_CASE("cli: validate") {
  const auto dir = scratch("cli-validate");
  RoadInstance inst = valign::testing::flat_road(4);
  const auto good = write(inst, dir);
  CHECK(run("validate " + quote(good.string())).code == 0);

  write_text_file(dir / "bad.json", R"({"sections": [
    {"station": 0, "ground_elevation": 1, "area": 1, "offset_lo": -1, "offset_hi": 1},
    {"station": 20, "ground_elevation": 1, "area": 1, "offset_lo": -1, "offset_hi": 1}],
    "borrow_pits": [{"section": 1, "capacity": 5}]})");
  const Run bad = run("validate " + quote((dir / "bad.json").string()));
  CHECK(bad.code == 1);
  CHECK(bad.output.find("borrow_pits[0].section") != std::string::npos);
}

TEST_CASE("cli: build writes MPS and prints model sizes") {
  const auto dir = scratch("cli-build");
  RoadInstance inst = valign::testing::flat_road(3);
  const auto path = write(inst, dir);
  const Run r = run("build " + quote(path.string()) + " --config-name MQN-B -o " + quote((dir / "m.mps").string()));
  CHECK(r.code == 0);
  CHECK(r.output.rfind("MQN-B variables 66 constraints ", 0) == 0);
  CHECK(r.output.find(" binaries 0 sos 0") != std::string::npos);
  CHECK(read_text_file(dir / "m.mps").find("* config: MQN-B") != std::string::npos);

  const Run qna = run("build " + quote(path.string()) + " --model qnf --haul avg -o " + quote((dir / "a.mps").string()));
  CHECK(qna.code == 0);
  const std::string mps = read_text_file(dir / "a.mps");
  CHECK(mps.find(" 1.067") != std::string::npos);
  CHECK(mps.find(" 0.1\n") != std::string::npos);  // 0.005 * 20 m per hop

  CHECK(run("build " + quote(path.string()) + " --model qnf -o x.mps").code == 2);

  inst.name = "blocked";
  inst.blocks = {{2}};
  const auto blocked = write(inst, dir);
  const Run ctg = run("build " + quote(blocked.string()) + " --model ctg -o " + quote((dir / "c.mps").string()));
  CHECK(ctg.code == 1);
  CHECK(ctg.output.find("block-free") != std::string::npos);
}

TEST_CASE("cli: oracle at fixed offsets") {
  const auto dir = scratch("cli-oracle");
  const auto path = write(valign::testing::flat_road(3), dir);
  const Run r = run("oracle " + quote(path.string()) + " --offsets 1,0,-1");
  CHECK(r.code == 0);
  CHECK(r.output.find("63.2") != std::string::npos);
}

TEST_CASE("cli: solve without a solver is a usage error") {
  const auto dir = scratch("cli-nosolver");
  const auto path = write(valign::testing::flat_road(3), dir);
  const Run r = run("solve " + quote(path.string()) + " -o " + quote((dir / "r.json").string()));
  CHECK(r.code == 2);
}

TEST_CASE("cli: solve, timeout and infeasible exit codes") {
  if (!valign::testing::test_solver()) {
    MESSAGE("CBC not available; skipped");
    return;
  }
  const auto dir = scratch("cli-solve");
  RoadInstance inst = valign::testing::flat_road(4);
  inst.sections[1].ground_elevation = 100.5;
  const auto ok = write(inst, dir);
  const Run r = run("solve " + quote(ok.string()) + " " + solver_args() + " -o " + quote((dir / "r.json").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("status optimal") != std::string::npos);
  CHECK(r.output.find("overall PASS") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "r.json"));
  CHECK(std::filesystem::exists(dir / "r.json.work" / "solver.log"));

  RoadInstance steep = valign::testing::flat_road(4);
  steep.name = "steep";
  for (auto& s : steep.sections) s.offset_lo = -0.1, s.offset_hi = 0.1;
  steep.sections[1].ground_elevation = 104;
  const Run inf = run("solve " + quote(write(steep, dir).string()) + " " + solver_args() + " -o " +
                      quote((dir / "s.json").string()));
  CHECK(inf.code == 3);
  CHECK(inf.output.find("status infeasible") != std::string::npos);

  GeneratorOptions opt;
  opt.roads = "G";
  opt.seed = 2;
  opt.min_blocks = opt.max_blocks = 3;
  const auto big = write(generate_suite(opt).front(), dir);
  const Run t = run("solve " + quote(big.string()) + " " + solver_args() + " --time-limit 0.01 -o " +
                    quote((dir / "t.json").string()) + " --work-dir " + quote((dir / "tw").string()));
  CHECK(t.code == 4);
  CHECK(std::filesystem::exists(dir / "tw" / "solver.log"));
}

TEST_CASE("cli: profile and report from a records file") {
  const auto dir = scratch("cli-profile");
  std::vector<BenchmarkRecord> rs;
  for (const auto& [inst, cfg, secs] : std::vector<std::tuple<std::string, std::string, double>>{
           {"p", "MQN-B", 1}, {"p", "QNS-B", 2}, {"q", "MQN-B", 4}, {"q", "QNS-B", 2}}) {
    BenchmarkRecord r;
    r.instance = inst;
    r.config = cfg;
    r.status = SolveStatus::optimal;
    r.objective = 10;
    r.wall_time = secs;
    r.validated = true;
    rs.push_back(r);
  }
  classify(rs);
  write_text_file(dir / "records.csv", records_csv(rs));
  const Run p = run("profile " + quote((dir / "records.csv").string()) + " --out " + quote((dir / "out").string()));
  CHECK(p.code == 0);
  const std::string csv = read_text_file(dir / "out" / "profile.csv");
  CHECK(csv.find("MQN-B,1,0.5\n") != std::string::npos);
  CHECK(csv.find("QNS-B,1,0.5\n") != std::string::npos);
  CHECK(csv.find("MQN-B,2,1\n") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "profile.svg"));

  const Run single =
      run("profile " + quote((dir / "records.csv").string()) + " --configs MQN-B --out " + quote((dir / "one").string()));
  CHECK(single.code == 0);
  CHECK(read_text_file(dir / "one" / "profile.csv").find("MQN-B,1,1\n") != std::string::npos);

  const Run rep = run("report " + quote((dir / "records.csv").string()));
  CHECK(rep.code == 0);
  CHECK(rep.output.find("QNS-B") != std::string::npos);
}

TEST_CASE("cli: bench over a suite with an infeasible instance") {
  if (!valign::testing::test_solver()) {
    MESSAGE("CBC not available; skipped");
    return;
  }
  const auto dir = scratch("cli-bench");
  RoadInstance good = valign::testing::flat_road(4);
  good.name = "good";
  good.sections[2].ground_elevation = 99.5;
  RoadInstance bad = valign::testing::flat_road(4);
  bad.name = "steep";
  for (auto& s : bad.sections) s.offset_lo = -0.1, s.offset_hi = 0.1;
  bad.sections[1].ground_elevation = 104;
  std::filesystem::create_directories(dir / "suite");
  write(good, dir / "suite");
  write(bad, dir / "suite");
  const Run r = run("bench " + quote((dir / "suite").string()) + " " + solver_args() +
                    " --configs MQN-B,QNS-B,CTG-B --workers 2 --out " + quote((dir / "out").string()));
  CHECK(r.code == 0);
  CHECK(read_text_file(dir / "out" / "solver.txt").rfind("solver cbc\n", 0) == 0);
  for (const char* f : {"records.csv", "times.csv", "accuracy.csv", "profile.csv", "profile.svg"})
    CHECK(std::filesystem::exists(dir / "out" / f));
  const auto rs = parse_records_csv(read_text_file(dir / "out" / "records.csv"));
  REQUIRE(rs.size() == 6);
  int infeasible = 0;
  for (const auto& x : rs) infeasible += x.status == SolveStatus::infeasible;
  CHECK(infeasible == 3);
}
