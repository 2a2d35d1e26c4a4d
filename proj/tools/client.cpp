#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pirates/client/client.hpp"
#include "pirates/net/runtime.hpp"
#include "tool_common.hpp"

using namespace pirates;

int main(int argc, char** argv) {
  CLI::App app{"Client: dials groups and exchanges snippets every round"};
  std::string coordinator, group_file, dial, plan_text, identity_hex, mix = "records", name, log_path, log_dir;
  bool idle = false;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  unsigned timeout_s = 0;
  app.add_option("--coordinator", coordinator, "Coordinator address")->required();
  app.add_option("--group-file", group_file, "Groups this client belongs to");
  auto* dial_opt = app.add_option("--dial", dial, "Call this group in every epoch");
  auto* idle_opt = app.add_flag("--idle", idle, "Only send cover traffic");
  auto* plan_opt = app.add_option("--plan", plan_text, "Per-epoch intents, e.g. g1,-,g1/3,!");
  dial_opt->excludes(idle_opt)->excludes(plan_opt);
  idle_opt->excludes(plan_opt);
  app.add_option("--epochs", epochs, "Epochs the plan covers")->check(CLI::PositiveNumber);
  app.add_option("--identity", identity_hex, "32-byte public identity in hex (random if absent)");
  app.add_option("--mix", mix, "Output mixing")->check(CLI::IsMember({"pcm", "records"}));
  app.add_option("--seed", seed, "Deterministic seed (0: from the OS)");
  app.add_option("--name", name, "Node name used in the log");
  app.add_option("--log", log_path, "Write the JSONL node log here");
  app.add_option("--log-dir", log_dir, "Write <name>.jsonl into this directory");
  app.add_option("--timeout-s", timeout_s, "Give up after this many seconds");
  CLI11_PARSE(app, argc, argv);

  return tools::guarded([&] {
    client::ClientConfig cfg;
    cfg.coordinator = wire::Endpoint::parse(coordinator);
    if (identity_hex.empty()) {
      auto rng = Rng::from_os();
      rng.fill(cfg.identity.bytes);
    } else {
      cfg.identity.bytes = array_from_hex<32>(identity_hex);
    }
    if (!group_file.empty()) {
      std::ifstream f(group_file);
      if (!f) throw Error(ErrorCode::IoError, "cannot read " + group_file);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg.groups = client::parse_group_file(ss.str(), cfg.identity);
    }
    if (!plan_text.empty()) {
      cfg.plan = client::parse_plan(plan_text);
    } else {
      cfg.plan.resize(epochs);
      if (!dial.empty()) {
        for (auto& p : cfg.plan) p.dial = dial;
      }
    }
    cfg.mix = mix == "pcm" ? client::MixMode::Pcm : client::MixMode::Records;
    if (seed != 0) cfg.seed = seed;

    net::TcpRuntime rt;
    nodes::SteadyClock clock;
    nodes::Recorder rec;
    client::Client node(cfg, clock, rec);
    int rc = 0;
    try {
      rt.run(node, rec, {std::chrono::seconds(timeout_s), std::chrono::milliseconds(2000)});
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = 1;
    }
    if (name.empty()) name = "client-" + std::to_string(node.mailbox());
    tools::save_log(rec, name, log_path, log_dir);
    if (node.rejected()) {
      std::cerr << "registration rejected\n";
      return 2;
    }
    for (const auto& d : rec.decisions) {
      std::cout << "epoch " << d.epoch << ": " << (d.group.empty() ? "idle" : "call " + d.group)
                << (d.all_random ? " (fallback to cover queries)" : "") << "\n";
    }
    for (const auto& o : rec.outputs) {
      if (o.sender == 0) continue;
      std::cout << "epoch " << o.epoch << " round " << o.round << ": " << o.payload.size() << " bytes from mailbox "
                << o.sender << "\n";
    }
    return rc;
  });
}
