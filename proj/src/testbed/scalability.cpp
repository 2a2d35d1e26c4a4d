#include "pirates/testbed/scalability.hpp"

#include <cmath>

#include "pirates/common/errors.hpp"

namespace pirates::testbed {

void ScalabilityParams::validate() const {
  for (double v : {n_clients, n_workers, n_relays, snippet_bits, client_bw_bps, server_bw_bps, reply_s,
                   answer_bits, parallel_slots}) {
    if (!(v > 0)) throw Error(ErrorCode::InvalidArgument, "scalability parameters must be positive");
  }
}

ScalabilityTerms analytic_scalability(const ScalabilityParams& p) {
  p.validate();
  ScalabilityTerms t;
  t.client_send = p.snippet_bits / p.client_bw_bps;
  t.relay_send = p.n_workers * (p.n_clients * p.snippet_bits / p.n_relays) / p.server_bw_bps;
  t.compute = p.n_clients * p.reply_s / (p.n_workers * p.parallel_slots);
  t.worker_send = (p.n_clients / p.n_workers) * p.answer_bits / p.server_bw_bps;
  t.total = t.client_send + t.relay_send + t.compute + t.worker_send;
  return t;
}

ScalabilityParams addra_params(double n_workers) {
  ScalabilityParams p;
  p.n_workers = n_workers;
  p.n_relays = 1;
  return p;
}

ScalabilityParams pirates_params(double n_workers, double workers_per_relay) {
  ScalabilityParams p;
  p.n_workers = n_workers;
  p.n_relays = std::max(1.0, n_workers / workers_per_relay);
  return p;
}

std::vector<ScalabilityAnchor> scalability_anchors() {
  return {
      {20, 0.530748866780599, 0.530748866780599},
      {60, 0.23117230428059896, 0.1904822001139323},
      {100, 0.2038090751139323, 0.12242886678059896},
      {140, 0.21533346499488468, 0.09326315249488466},
      {180, 0.23982039455837675, 0.07705997789171007},
      {220, 0.27019938761393225, 0.06674886678059896},
  };
}

std::vector<ScalabilityRow> scalability_sweep(double from, double to, double step, double workers_per_relay) {
  if (!(step > 0) || !(from > 0) || to < from) throw Error(ErrorCode::InvalidArgument, "bad sweep range");
  const auto anchors = scalability_anchors();
  std::vector<ScalabilityRow> rows;
  for (double w = from; w <= to + 1e-9; w += step) {
    ScalabilityRow r;
    r.workers = w;
    const auto pp = pirates_params(w, workers_per_relay);
    r.relays = pp.n_relays;
    r.addra_s = analytic_scalability(addra_params(w)).total;
    r.pirates_s = analytic_scalability(pp).total;
    for (const auto& a : anchors) {
      if (std::abs(a.workers - w) < 1e-9 && workers_per_relay == 20) {
        r.has_anchor = true;
        r.anchor_addra_s = a.addra_s;
        r.anchor_pirates_s = a.pirates_s;
      }
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pirates::testbed
