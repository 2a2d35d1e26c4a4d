#pragma once

#include <vector>

namespace pirates::testbed {

// Cost model for distributing one round of snippets and computing answers.
// Bandwidths are in bit/s with binary prefixes (1 Mb/s = 2^20 bit/s).
struct ScalabilityParams {
  double n_clients = 32768;
  double n_workers = 20;
  double n_relays = 1;
  double snippet_bits = 400;
  double client_bw_bps = 100.0 * (1 << 20);
  double server_bw_bps = 12.0 * (1 << 30);
  double reply_s = 0.013;
  double answer_bits = 65536.0 * 8;
  double parallel_slots = 48;

  void validate() const;
};

struct ScalabilityTerms {
  double client_send = 0;  // one snippet over the client uplink
  double relay_send = 0;   // every relay ships its share to every worker
  double compute = 0;      // answers spread over workers and parallel slots
  double worker_send = 0;  // each worker ships its answers
  double total = 0;
};

ScalabilityTerms analytic_scalability(const ScalabilityParams& p);

// Addra is the single-relay special case.
ScalabilityParams addra_params(double n_workers);
ScalabilityParams pirates_params(double n_workers, double workers_per_relay = 20);

struct ScalabilityAnchor {
  double workers;
  double addra_s;
  double pirates_s;
};
// Published sending/computing times at 2^15 clients, one relay per 20
// workers.
std::vector<ScalabilityAnchor> scalability_anchors();

struct ScalabilityRow {
  double workers = 0;
  double relays = 0;
  double addra_s = 0;
  double pirates_s = 0;
  bool has_anchor = false;
  double anchor_addra_s = 0;
  double anchor_pirates_s = 0;
};
std::vector<ScalabilityRow> scalability_sweep(double from, double to, double step, double workers_per_relay);

}  // namespace pirates::testbed
