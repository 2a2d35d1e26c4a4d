#include <iostream>

#include "CLI11.hpp"
#include "pirates/net/runtime.hpp"
#include "pirates/nodes/relay.hpp"
#include "tool_common.hpp"

using namespace pirates;

int main(int argc, char** argv) {
  CLI::App app{"Relay: collects invites and snippets and forwards them"};
  std::string coordinator, listen = "127.0.0.1:0", log_path, log_dir;
  std::uint64_t seed = 0;
  unsigned timeout_s = 0;
  app.add_option("--coordinator", coordinator, "Coordinator address")->required();
  app.add_option("--listen", listen, "Address to listen on and advertise");
  app.add_option("--seed", seed, "Deterministic seed (0: from the OS)");
  app.add_option("--log", log_path, "Write the JSONL node log here");
  app.add_option("--log-dir", log_dir, "Write relay-<index>.jsonl into this directory");
  app.add_option("--timeout-s", timeout_s, "Give up after this many seconds");
  CLI11_PARSE(app, argc, argv);

  return tools::guarded([&] {
    net::TcpRuntime rt;
    nodes::RelayConfig cfg;
    cfg.coordinator = wire::Endpoint::parse(coordinator);
    cfg.listen = rt.listen(wire::Endpoint::parse(listen));
    if (seed != 0) cfg.seed = seed;
    nodes::SteadyClock clock;
    nodes::Recorder rec;
    nodes::Relay node(cfg, clock, rec);
    int rc = 0;
    try {
      rt.run(node, rec, {std::chrono::seconds(timeout_s), std::chrono::milliseconds(2000)});
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = 1;
    }
    const auto name = "relay-" + std::to_string(node.index() & ~nodes::kPendingBit);
    tools::save_log(rec, name, log_path, log_dir);
    std::cout << name << " done" << std::endl;
    return rc;
  });
}
