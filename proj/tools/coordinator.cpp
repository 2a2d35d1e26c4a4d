#include <iostream>

#include "CLI11.hpp"
#include "pirates/net/runtime.hpp"
#include "pirates/nodes/coordinator.hpp"
#include "tool_common.hpp"

using namespace pirates;

int main(int argc, char** argv) {
  CLI::App app{"Coordinator: registration, epoch and round control"};
  std::string listen = "127.0.0.1:7000";
  std::string port_file, log_path, log_dir;
  nodes::CoordinatorConfig cfg;
  std::uint64_t seed = 0;
  unsigned timeout_s = 0;
  app.add_option("--listen", listen, "Address to listen on (port 0 picks one)");
  app.add_option("--relays", cfg.n_relays, "Number of relays")->required()->check(CLI::PositiveNumber);
  app.add_option("--workers", cfg.n_workers, "Number of workers")->required()->check(CLI::PositiveNumber);
  app.add_option("--group-size", cfg.group_size, "Largest group size G")->required()->check(CLI::Range(2u, 64u));
  app.add_option("--rounds", cfg.schedule.rounds, "Rounds per epoch")->required()->check(CLI::PositiveNumber);
  app.add_option("--round-ms", cfg.schedule.round_ms, "Round period")->required()->check(CLI::PositiveNumber);
  app.add_option("--snippet-ms", cfg.schedule.snippet_ms, "Snippet length")->required()->check(CLI::PositiveNumber);
  app.add_option("--dial-ms", cfg.schedule.dial_ms, "Invite collection window");
  app.add_option("--collect-ms", cfg.schedule.collect_ms, "Snippet collection window");
  app.add_option("--bitrate", cfg.schedule.bitrate_bps, "Voice bitrate in bit/s");
  app.add_option("--epochs", cfg.epochs, "Epochs to run")->check(CLI::PositiveNumber);
  app.add_option("--clients", cfg.expected_clients, "Start once this many clients registered (0: use --register-ms)");
  app.add_option("--register-ms", cfg.register_ms, "Registration window after the servers are up");
  app.add_option("--simulated-users", cfg.simulated_users, "Pad buckets as if this many users were online");
  app.add_option("--he-n", cfg.he.n, "LWE dimension");
  app.add_option("--he-log-q", cfg.he.log_q, "Ciphertext modulus bits");
  app.add_option("--he-plain-bits", cfg.he.plain_bits, "Plaintext bits per limb");
  app.add_option("--he-pk-rows", cfg.he.pk_rows, "Public matrix rows");
  app.add_option("--seed", seed, "Deterministic seed (0: from the OS)");
  app.add_option("--port-file", port_file, "Write the bound port here");
  app.add_option("--log", log_path, "Write the JSONL node log here");
  app.add_option("--log-dir", log_dir, "Write coordinator.jsonl into this directory");
  app.add_option("--timeout-s", timeout_s, "Give up after this many seconds");
  CLI11_PARSE(app, argc, argv);

  return tools::guarded([&] {
    cfg.he.validate();
    if (seed != 0) cfg.seed = seed;
    net::TcpRuntime rt;
    const auto bound = rt.listen(wire::Endpoint::parse(listen));
    if (!port_file.empty()) tools::write_port_file(port_file, bound.port);
    std::cout << "coordinator listening on " << bound.str() << std::endl;
    nodes::SteadyClock clock;
    nodes::Recorder rec;
    nodes::Coordinator node(cfg, clock, rec);
    int rc = 0;
    try {
      rt.run(node, rec, {std::chrono::seconds(timeout_s), std::chrono::milliseconds(2000)});
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = 1;
    }
    tools::save_log(rec, "coordinator", log_path, log_dir);
    std::cout << "coordinator done: " << node.n_clients() << " clients, " << node.epoch() << " epochs" << std::endl;
    return rc;
  });
}
