#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pirates/common/errors.hpp"
#include "pirates/common/rng.hpp"
#include "pirates/crypto/hash.hpp"
#include "pirates/crypto/sym.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/pir/pir.hpp"
#include "pirates/testbed/artifacts.hpp"
#include "pirates/testbed/dialing_bench.hpp"
#include "pirates/testbed/inproc.hpp"
#include "pirates/testbed/latency.hpp"
#include "pirates/testbed/scalability.hpp"
#include "pirates/testbed/scenario.hpp"
#include "pirates/testbed/snippet_search.hpp"
#include "pirates/wire/snippet.hpp"

namespace py = pybind11;
using namespace pirates;

namespace {

Bytes to_bytes(const py::bytes& b) {
  std::string_view v(b);
  return Bytes(v.begin(), v.end());
}

py::bytes from_bytes(ByteView b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

template <std::size_t N>
std::array<std::uint8_t, N> to_array(const py::bytes& b, const char* what) {
  std::string_view v(b);
  if (v.size() != N) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be " + std::to_string(N) + " bytes");
  std::array<std::uint8_t, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

mapping::MappingSeed seed_of(const py::bytes& b) { return {to_array<16>(b, "seed")}; }

py::dict check_to_dict(const testbed::CallCheck& c) {
  py::dict d;
  d["ok"] = c.ok();
  d["expected"] = c.expected;
  d["recovered"] = c.recovered;
  d["unexpected"] = c.unexpected;
  d["mixed_bad"] = c.mixed_bad;
  d["decisions_wrong"] = c.decisions_wrong;
  d["call_attempts"] = c.call_attempts;
  d["fallback_rate"] = c.fallback_rate();
  d["problems"] = c.problems;
  return d;
}

py::dict breakdown_to_dict(const testbed::LatencyBreakdown& b) {
  py::dict d;
  const auto v = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) d[testbed::LatencyBreakdown::kColumns[i]] = v[i];
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anonymous group calls: PIR, bucket mapping, dialing and the testbed";

  py::register_exception<Error>(m, "PiratesError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("bytes", [](Rng& r, std::size_t n) { return from_bytes(r.bytes(n)); })
      .def("uniform", &Rng::uniform);

  m.def("hash", [](const py::bytes& data) {
    auto d = crypto::hash(to_bytes(data));
    return from_bytes(d.bytes);
  });

  py::class_<crypto::SymCipher>(m, "SymCipher")
      .def(py::init<std::size_t>(), py::arg("capacity"))
      .def_property_readonly("capacity", &crypto::SymCipher::capacity)
      .def_property_readonly("ciphertext_size", &crypto::SymCipher::ciphertext_size)
      .def("encrypt",
           [](const crypto::SymCipher& c, const py::bytes& key, const py::bytes& iv, const py::bytes& pt) {
             return from_bytes(c.encrypt({to_array<32>(key, "key")}, to_array<16>(iv, "iv"), to_bytes(pt)));
           })
      .def("decrypt", [](const crypto::SymCipher& c, const py::bytes& key, const py::bytes& iv, const py::bytes& ct) {
        return from_bytes(c.decrypt({to_array<32>(key, "key")}, to_array<16>(iv, "iv"), to_bytes(ct)));
      });

  m.def("snippet_capacity", &wire::snippet_capacity, py::arg("snippet_ms"),
        py::arg("bitrate_bps") = wire::kDefaultBitrateBps);

  // PIR
  py::class_<pir::PirKeys>(m, "PirKeys").def_readonly("max_items", &pir::PirKeys::max_items);
  py::class_<pir::PirState>(m, "PirState").def_readonly("requested_index", &pir::PirState::requested_index);
  py::class_<pir::PirQuery>(m, "PirQuery").def("__len__", [](const pir::PirQuery& q) { return q.selection.size(); });
  py::class_<pir::PirAnswer>(m, "PirAnswer").def("__len__", [](const pir::PirAnswer& a) { return a.limbs.size(); });
  m.def("pir_setup", [](std::uint32_t security_param, std::size_t max_items, Rng& rng) {
    return pir::pir_setup(security_param, max_items, rng);
  });
  m.def("pir_query", &pir::pir_query, py::arg("keys"), py::arg("index"), py::arg("n_items"), py::arg("item_size"),
        py::arg("rng"));
  m.def("pir_answer", [](const pir::PirKeys& keys, const std::vector<py::bytes>& items, const pir::PirQuery& q) {
    if (items.empty()) throw Error(ErrorCode::InvalidArgument, "empty database");
    const auto size = std::string_view(items[0]).size();
    pir::PirDatabase db(items.size(), size, keys.pk.params.plain_bits);
    for (std::size_t i = 0; i < items.size(); ++i) db.send(to_bytes(items[i]), i + 1);
    db.preprocess();
    return pir::pir_answer(keys.pk, db, q);
  });
  m.def("pir_decode", [](const pir::PirKeys& keys, const pir::PirState& st, const pir::PirAnswer& a) {
    return from_bytes(pir::pir_decode(keys.sk, st, a));
  });

  // Bucket mapping
  m.def("n_buckets_for", &mapping::n_buckets_for, py::arg("group_size_max"));
  py::class_<mapping::BucketMapping>(m, "BucketMapping")
      .def_property_readonly("n_mailboxes", &mapping::BucketMapping::n_mailboxes)
      .def_property_readonly("n_buckets", &mapping::BucketMapping::n_buckets)
      .def_property_readonly("bucket_lists", &mapping::BucketMapping::bucket_lists)
      .def("buckets_of",
           [](const mapping::BucketMapping& mp, std::uint32_t mailbox) {
             const auto& b = mp.assignment(mailbox).buckets;
             return std::vector<std::uint32_t>(b.begin(), b.end());
           })
      .def("position_of", &mapping::BucketMapping::position_of);
  m.def("build_mapping", [](std::uint32_t n, std::uint32_t b, const py::bytes& seed) {
    return mapping::build_mapping(n, b, seed_of(seed));
  });
  m.def("select_indices", [](const std::vector<std::uint32_t>& targets, const mapping::BucketMapping& mp, Rng& rng) {
    auto sel = mapping::select_indices(targets, mp, rng);
    py::dict d;
    d["positions"] = sel.positions;
    d["targets"] = sel.targets;
    d["all_random"] = sel.all_random;
    return d;
  });

  // Dialing
  m.def("make_invite", [](const py::bytes& gmk, const py::bytes& pk, std::uint64_t epoch) {
    return from_bytes(dialing::make_invite({to_array<32>(gmk, "gmk")}, {to_array<32>(pk, "pk")}, epoch).bytes);
  });

  // Testbed
  py::class_<testbed::Scenario>(m, "Scenario")
      .def_readonly("name", &testbed::Scenario::name)
      .def_readonly("n_clients", &testbed::Scenario::n_clients)
      .def_readonly("epochs", &testbed::Scenario::epochs)
      .def("__str__", &testbed::format_scenario);
  m.def("parse_scenario", &testbed::parse_scenario);
  m.def("load_scenario", &testbed::load_scenario);
  m.def(
      "run_scenario",
      [](const testbed::Scenario& s, const std::string& out_dir) {
        testbed::RunResult run;
        testbed::CallCheck check;
        {
          py::gil_scoped_release release;
          run = testbed::run_scenario_inproc(s);
          if (!out_dir.empty()) testbed::write_run(run, out_dir);
          check = testbed::check_calls(run);
        }
        py::dict d;
        d["completed"] = run.completed;
        d["problems"] = run.problems;
        d["calls"] = check_to_dict(check);
        return d;
      },
      py::arg("scenario"), py::arg("out_dir") = "");
  m.def("compare_transcripts", [](const testbed::Scenario& a, const testbed::Scenario& b) {
    return testbed::compare_server_shapes(testbed::run_scenario_inproc(a), testbed::run_scenario_inproc(b));
  });

  m.def("additional_ms", &testbed::additional_ms);
  m.def("reference_breakdowns", [] {
    py::list out;
    for (const auto& r : testbed::reference_breakdowns()) {
      auto d = breakdown_to_dict(r.row);
      d["label"] = r.label;
      d["snippet_ms"] = r.snippet_ms;
      d["formula_total"] = testbed::mouth_to_ear(r.row);
      out.append(d);
    }
    return out;
  });
  m.def(
      "scalability",
      [](double workers, double workers_per_relay) {
        return py::make_tuple(testbed::analytic_scalability(testbed::addra_params(workers)).total,
                              testbed::analytic_scalability(testbed::pirates_params(workers, workers_per_relay)).total);
      },
      py::arg("workers"), py::arg("workers_per_relay") = 20);
  m.def("bench_dialing",
        [](std::uint32_t n, std::uint32_t group, const std::string& mode, std::uint32_t reps, std::uint64_t seed) {
          auto r = testbed::bench_dialing(n, group, testbed::parse_dial_mode(mode), reps, seed);
          return py::make_tuple(r.mean_us, r.stddev_us);
        },
        py::arg("n"), py::arg("group"), py::arg("mode") = "pirates", py::arg("reps") = 10, py::arg("seed") = 1);
  m.def("search_snippet", [](std::uint32_t from, std::uint32_t to, std::uint32_t step,
                             const std::function<double(std::uint32_t)>& probe) {
    return testbed::search_snippet(from, to, step, probe).best_ms;
  });
}
