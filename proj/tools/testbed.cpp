#include <filesystem>
#include <iostream>
#include <regex>

#include "CLI11.hpp"
#include "pirates/testbed/artifacts.hpp"
#include "pirates/testbed/csv.hpp"
#include "pirates/testbed/dialing_bench.hpp"
#include "pirates/testbed/inproc.hpp"
#include "pirates/testbed/process_runner.hpp"
#include "pirates/testbed/scalability.hpp"
#include "pirates/testbed/snippet_search.hpp"
#include "tool_common.hpp"

using namespace pirates;
using namespace pirates::testbed;

namespace {

std::string default_bin_dir(const char* argv0) {
  std::error_code ec;
  auto self = std::filesystem::canonical("/proc/self/exe", ec);
  if (!ec) return self.parent_path().string();
  return std::filesystem::path(argv0).parent_path().string();
}

RunResult execute(const Scenario& s, bool inproc, const std::string& bin_dir, const std::string& work_dir,
                  unsigned timeout_s) {
  if (inproc) return run_scenario_inproc(s);
  ProcessOptions opt;
  opt.bin_dir = bin_dir;
  opt.work_dir = work_dir;
  opt.timeout = std::chrono::seconds(timeout_s);
  return run_scenario_processes(s, opt);
}

double mean_processing_ms(const RunResult& run) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& node : run.nodes) {
    if (node.role != wire::Role::Worker) continue;
    for (const auto& t : node.rec.timings) {
      if (t.name == "processing_us") {
        sum += static_cast<double>(t.value) / 1000.0;
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Testbed: scenario runs, latency breakdowns and benchmarks"};
  app.require_subcommand(1);
  std::string bin_dir = default_bin_dir(argv[0]);
  app.add_option("--bin-dir", bin_dir, "Directory holding the node executables");

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write logs and CSVs");
  std::string scenario_path, out_dir = "run-out";
  bool inproc = false;
  unsigned timeout_s = 300;
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_flag("--inproc", inproc, "Run every node in this process on a virtual clock");
  run_cmd->add_option("--timeout-s", timeout_s, "Abort the run after this many seconds");

  auto* bench_cmd = app.add_subcommand("bench-dialing", "Time invite processing");
  std::uint32_t bench_n = 32768, bench_g = 8, reps = 100;
  std::string mode = "pirates", csv_path;
  std::uint64_t seed = 1;
  bench_cmd->add_option("--n", bench_n, "Invites received")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--group", bench_g, "Group size")->check(CLI::Range(2u, 1024u));
  bench_cmd->add_option("--mode", mode, "pirates or gaddra")->check(CLI::IsMember({"pirates", "gaddra"}));
  bench_cmd->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", seed, "Corpus seed");
  bench_cmd->add_option("--csv", csv_path, "Also write a CSV row here");

  auto* scal_cmd = app.add_subcommand("scalability", "Evaluate the analytic worker-scalability model");
  std::string sweep = "workers=20..220:40";
  double relays_per = 20;
  std::string scal_csv;
  scal_cmd->add_option("--sweep", sweep, "workers=FROM..TO:STEP");
  scal_cmd->add_option("--relays-per", relays_per, "Workers per relay")->check(CLI::PositiveNumber);
  scal_cmd->add_option("--csv", scal_csv, "Also write the table here");

  auto* snip_cmd = app.add_subcommand("sweep-snippet", "Find the shortest snippet the workers keep up with");
  std::uint32_t from = 40, to = 300, step = 20;
  snip_cmd->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  snip_cmd->add_option("--from", from, "Shortest candidate (ms)")->check(CLI::PositiveNumber);
  snip_cmd->add_option("--to", to, "Longest candidate (ms)")->check(CLI::PositiveNumber);
  snip_cmd->add_option("--step", step, "Candidate step (ms)")->check(CLI::PositiveNumber);
  snip_cmd->add_option("--out", out_dir, "Directory for per-candidate runs");
  snip_cmd->add_flag("--inproc", inproc, "Run every node in this process");

  CLI11_PARSE(app, argc, argv);

  return tools::guarded([&]() -> int {
    if (run_cmd->parsed()) {
      auto s = load_scenario(scenario_path);
      std::filesystem::create_directories(out_dir);
      auto run = execute(s, inproc, bin_dir, out_dir, timeout_s);
      write_run(run, out_dir);
      const auto cc = check_calls(run);
      std::cout << "scenario " << s.name << ": " << (run.completed ? "completed" : "incomplete") << ", "
                << cc.recovered << "/" << cc.expected << " snippets recovered, " << cc.fallbacks << "/"
                << cc.call_attempts << " selection fallbacks\n";
      for (const auto& p : run.problems) std::cout << "  problem: " << p << "\n";
      for (const auto& p : cc.problems) std::cout << "  " << p << "\n";
      std::cout << "artifacts in " << out_dir << "\n";
      return run.completed && cc.ok() ? 0 : 1;
    }
    if (bench_cmd->parsed()) {
      auto r = bench_dialing(bench_n, bench_g, parse_dial_mode(mode), reps, seed);
      std::cout << "mode,n,group,mean_us,stddev_us,reps\n"
                << to_string(r.mode) << "," << r.n << "," << r.group << "," << r.mean_us << "," << r.stddev_us
                << "," << r.reps << "\n";
      if (!csv_path.empty()) write_dialing_csv(csv_path, {r});
      return 0;
    }
    if (scal_cmd->parsed()) {
      std::smatch m;
      static const std::regex re(R"(workers=(\d+(?:\.\d+)?)\.\.(\d+(?:\.\d+)?):(\d+(?:\.\d+)?))");
      if (!std::regex_match(sweep, m, re)) throw Error(ErrorCode::InvalidArgument, "sweep must look like workers=20..220:40");
      auto rows = scalability_sweep(std::stod(m[1]), std::stod(m[2]), std::stod(m[3]), relays_per);
      std::cout << "workers,relays,addra_s,pirates_s,anchor_addra_s,anchor_pirates_s,delta_addra_s,delta_pirates_s\n";
      for (const auto& r : rows) {
        std::cout << r.workers << "," << r.relays << "," << r.addra_s << "," << r.pirates_s << ",";
        if (r.has_anchor) {
          std::cout << r.anchor_addra_s << "," << r.anchor_pirates_s << "," << r.addra_s - r.anchor_addra_s << ","
                    << r.pirates_s - r.anchor_pirates_s;
        } else {
          std::cout << ",,,";
        }
        std::cout << "\n";
      }
      if (!scal_csv.empty()) write_scalability_csv(scal_csv, rows);
      return 0;
    }
    if (snip_cmd->parsed()) {
      const auto base = load_scenario(scenario_path);
      auto probe = [&](std::uint32_t ms) {
        auto s = base;
        s.schedule.snippet_ms = ms;
        s.schedule.round_ms = ms;
        const auto dir = (std::filesystem::path(out_dir) / ("snippet-" + std::to_string(ms))).string();
        std::filesystem::create_directories(dir);
        auto run = execute(s, inproc, bin_dir, dir, timeout_s);
        write_run(run, dir);
        const double p = mean_processing_ms(run);
        std::cout << "snippet_ms=" << ms << " processing_ms=" << p << " ratio=" << p / ms << std::endl;
        return p;
      };
      try {
        auto res = search_snippet(from, to, step, probe);
        std::cout << "chosen snippet_ms=" << res.best_ms << "\n";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFeasible) throw;
        std::cout << "no feasible snippet length in range\n";
        return 3;
      }
      return 0;
    }
    return 1;
  });
}
