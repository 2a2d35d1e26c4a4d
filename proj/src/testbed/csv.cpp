#include "pirates/testbed/csv.hpp"

#include <fstream>
#include <iomanip>

#include "pirates/common/errors.hpp"
#include "pirates/testbed/artifacts.hpp"

namespace pirates::testbed {

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << std::setprecision(10);
  return f;
}

void close_csv(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace

void write_breakdown_csv(const std::string& path, const std::vector<LatencyBreakdown>& rows) {
  auto f = open_csv(path);
  for (std::size_t i = 0; i < LatencyBreakdown::kColumns.size(); ++i) f << (i ? "," : "") << LatencyBreakdown::kColumns[i];
  f << "\n";
  for (const auto& r : rows) {
    auto v = r.values();
    for (std::size_t i = 0; i < v.size(); ++i) f << (i ? "," : "") << v[i];
    f << "\n";
  }
  close_csv(f, path);
}

void write_transcript_csv(const std::string& path, const RunResult& run) {
  auto f = open_csv(path);
  f << "node,dir,phase,type,size,count\n";
  for (const auto& n : run.nodes) {
    for (const auto& [k, count] : shape_of(n.rec)) {
      f << n.name << "," << std::get<0>(k) << "," << std::get<1>(k) << "," << std::get<2>(k) << ","
        << std::get<3>(k) << "," << count << "\n";
    }
  }
  close_csv(f, path);
}

void write_outputs_csv(const std::string& path, const RunResult& run) {
  auto f = open_csv(path);
  f << "client,epoch,round,receiver,sender,bytes,payload_hex\n";
  for (const auto& n : run.nodes) {
    for (const auto& o : n.rec.outputs) {
      f << n.client << "," << o.epoch << "," << o.round << "," << o.receiver << "," << o.sender << ","
        << o.payload.size() << "," << to_hex(o.payload) << "\n";
    }
  }
  close_csv(f, path);
}

void write_decisions_csv(const std::string& path, const RunResult& run) {
  auto f = open_csv(path);
  f << "client,epoch,mailbox,group,dialed,all_random,targets\n";
  for (const auto& n : run.nodes) {
    for (const auto& d : n.rec.decisions) {
      f << n.client << "," << d.epoch << "," << d.client << "," << d.group << "," << d.dialed << "," << d.all_random
        << ",";
      for (std::size_t i = 0; i < d.targets.size(); ++i) f << (i ? " " : "") << d.targets[i];
      f << "\n";
    }
  }
  close_csv(f, path);
}

void write_scalability_csv(const std::string& path, const std::vector<ScalabilityRow>& rows) {
  auto f = open_csv(path);
  f << "workers,relays,addra_s,pirates_s,anchor_addra_s,anchor_pirates_s,delta_addra_s,delta_pirates_s\n";
  for (const auto& r : rows) {
    f << r.workers << "," << r.relays << "," << r.addra_s << "," << r.pirates_s << ",";
    if (r.has_anchor) {
      f << r.anchor_addra_s << "," << r.anchor_pirates_s << "," << (r.addra_s - r.anchor_addra_s) << ","
        << (r.pirates_s - r.anchor_pirates_s);
    } else {
      f << ",,,";
    }
    f << "\n";
  }
  close_csv(f, path);
}

void write_dialing_csv(const std::string& path, const std::vector<DialBenchResult>& rows) {
  auto f = open_csv(path);
  f << "mode,n,group,mean_us,stddev_us,reps\n";
  for (const auto& r : rows) {
    f << to_string(r.mode) << "," << r.n << "," << r.group << "," << r.mean_us << "," << r.stddev_us << "," << r.reps
      << "\n";
  }
  close_csv(f, path);
}

}  // namespace pirates::testbed
