#include "pirates/testbed/process_runner.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pirates/common/errors.hpp"

extern char** environ;

namespace pirates::testbed {

namespace fs = std::filesystem;

namespace {

pid_t spawn(const std::string& exe, const std::vector<std::string>& args, const fs::path& console) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(exe.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, console.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&fa, STDOUT_FILENO, STDERR_FILENO);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe.c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw Error(ErrorCode::SpawnFailure, exe + ": " + std::strerror(rc));
  return pid;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f || !(f << text)) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

RunResult run_scenario_processes(const Scenario& s, const ProcessOptions& opt) {
  s.validate();
  const fs::path bin(opt.bin_dir);
  const fs::path work(opt.work_dir);
  const fs::path logs = work / "logs";
  std::error_code ec;
  fs::remove_all(logs, ec);
  fs::create_directories(logs, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + logs.string());
  const fs::path port_file = work / "coordinator.port";
  fs::remove(port_file, ec);

  const auto deadline = std::chrono::steady_clock::now() + opt.timeout;
  std::vector<pid_t> pids;
  auto kill_all = [&] {
    for (auto pid : pids) ::kill(pid, SIGKILL);
    for (auto pid : pids) ::waitpid(pid, nullptr, 0);
  };

  try {
    const auto& sc = s.schedule;
    pids.push_back(spawn((bin / "coordinator").string(),
                         {"--listen", "127.0.0.1:0", "--relays", std::to_string(s.relays), "--workers",
                          std::to_string(s.workers), "--group-size", std::to_string(s.group_size), "--rounds",
                          std::to_string(sc.rounds), "--round-ms", std::to_string(sc.round_ms), "--snippet-ms",
                          std::to_string(sc.snippet_ms), "--dial-ms", std::to_string(sc.dial_ms), "--collect-ms",
                          std::to_string(sc.collect_ms), "--bitrate", std::to_string(sc.bitrate_bps), "--clients",
                          std::to_string(s.n_clients), "--epochs", std::to_string(s.epochs), "--simulated-users",
                          std::to_string(s.simulated_users), "--he-n", std::to_string(s.he.n), "--he-log-q",
                          std::to_string(s.he.log_q), "--he-plain-bits", std::to_string(s.he.plain_bits),
                          "--he-pk-rows", std::to_string(s.he.pk_rows), "--seed",
                          std::to_string(s.coordinator_seed()), "--port-file", port_file.string(), "--log",
                          (logs / "coordinator.jsonl").string()},
                         work / "coordinator.out"));

    std::string port;
    while (port.empty()) {
      if (std::chrono::steady_clock::now() > deadline)
        throw Error(ErrorCode::SpawnFailure, "coordinator did not report its port");
      if (fs::exists(port_file)) {
        port = read_file(port_file);
        while (!port.empty() && (port.back() == '\n' || port.back() == ' ')) port.pop_back();
      }
      if (port.empty()) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    const std::string coord = "127.0.0.1:" + port;

    // Servers name their logs after the index the coordinator assigns.
    for (std::uint32_t i = 0; i < s.relays; ++i) {
      pids.push_back(spawn((bin / "relay").string(),
                           {"--coordinator", coord, "--seed", std::to_string(s.server_seed(wire::Role::Relay, i)),
                            "--log-dir", logs.string()},
                           work / ("relay-" + std::to_string(i) + ".out")));
    }
    for (std::uint32_t i = 0; i < s.workers; ++i) {
      pids.push_back(spawn((bin / "worker").string(),
                           {"--coordinator", coord, "--threads", std::to_string(s.worker_threads), "--min-round-ms",
                            std::to_string(s.worker_min_round_ms), "--seed",
                            std::to_string(s.server_seed(wire::Role::Worker, i)), "--log-dir", logs.string()},
                           work / ("worker-" + std::to_string(i) + ".out")));
    }
    for (std::uint32_t c = 1; c <= s.n_clients; ++c) {
      const auto group_file = work / ("client-" + std::to_string(c) + ".groups");
      write_file(group_file, client::format_group_file(s.groups_of(c)));
      const auto name = "client-" + std::to_string(c);
      pids.push_back(spawn((bin / "client").string(),
                           {"--coordinator", coord, "--group-file", group_file.string(), "--identity",
                            to_hex(s.identity(c).bytes), "--plan", s.plan_string(c), "--epochs",
                            std::to_string(s.epochs), "--mix", s.mix == client::MixMode::Pcm ? "pcm" : "records",
                            "--seed", std::to_string(s.client_seed(c)), "--name", name, "--log",
                            (logs / (name + ".jsonl")).string()},
                           work / (name + ".out")));
    }
  } catch (...) {
    kill_all();
    throw;
  }

  RunResult run;
  std::vector<std::string> problems;
  bool all_ok = true;
  std::vector<bool> done(pids.size(), false);
  std::size_t remaining = pids.size();
  while (remaining > 0) {
    for (std::size_t i = 0; i < pids.size(); ++i) {
      if (done[i]) continue;
      int status = 0;
      const pid_t r = ::waitpid(pids[i], &status, WNOHANG);
      if (r == pids[i]) {
        done[i] = true;
        --remaining;
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
          all_ok = false;
          problems.push_back("process " + std::to_string(i) + " exited with status " + std::to_string(status));
        }
      }
    }
    if (remaining == 0) break;
    if (std::chrono::steady_clock::now() > deadline) {
      all_ok = false;
      problems.push_back("timeout; killing remaining processes");
      for (std::size_t i = 0; i < pids.size(); ++i) {
        if (!done[i]) {
          ::kill(pids[i], SIGKILL);
          ::waitpid(pids[i], nullptr, 0);
        }
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }

  run = read_run_logs(s, logs.string());
  run.completed = all_ok;
  run.problems.insert(run.problems.end(), problems.begin(), problems.end());
  return run;
}

}  // namespace pirates::testbed
