#include "pointsim/net.hpp"
#include "pointsim/runner.hpp"
#include "pointsim/telemetry.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace pointsim;
using namespace pointsim::telemetry;

TEST_CASE("uninterrupted arrivals produce no disruption")
{
  std::vector<sim::Time> t;
  for (sim::Time x = 0; x < 100'000; x += 2800) {
    t.push_back(x);
  }
  CHECK(disruption_intervals(t, 2800, 0, t.back() + 2800).empty());
}

TEST_CASE("a gap yields the span where packets were due")
{
  const std::vector<sim::Time> t{0, 2800, 5600, 30'000, 32'800};
  const auto d = disruption_intervals(t, 2800, 0, 35'000);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == Interval{8400, 30'000});
  CHECK(d[0].length() == 21'600);
}

TEST_CASE("gaps of up to twice the interval are jitter")
{
  const std::vector<sim::Time> t{0, 5600, 11'200};
  CHECK(disruption_intervals(t, 2800, 0, 12'000).empty());
  CHECK(disruption_intervals(t, 2800, 0, 12'000, 2000).size() == 2);
}

TEST_CASE("silent tail and empty stream")
{
  const std::vector<sim::Time> t{1000, 3800};
  const auto d = disruption_intervals(t, 2800, 0, 50'000);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == Interval{6600, 50'000});
  const auto none = disruption_intervals({}, 2800, 100, 900);
  REQUIRE(none.size() == 1);
  CHECK(none[0] == Interval{100, 900});
  CHECK(disruption_intervals(t, 2800, 500, 500).empty());
  CHECK_THROWS(disruption_intervals(t, 0, 0, 10));
}

TEST_CASE("arrivals outside the active window are ignored")
{
  const std::vector<sim::Time> t{0, 2800, 5600, 8400, 11'200};
  CHECK(disruption_intervals(t, 2800, 5600, 11'201).empty());
}

namespace {

struct LedgerBed {
  sim::Scheduler sched;
  EventLog log{&sched};
  net::Runtime rt{sched, log};
  net::PacketLedger ledger{rt};

  net::Packet packet(std::int64_t size)
  {
    auto m = std::make_shared<net::Message>();
    m->cls = net::ContentClass::chunk;
    m->size = size;
    net::Packet p;
    p.id = rt.packet_id();
    p.message = m;
    p.size = size;
    return p;
  }
};

} // namespace

TEST_CASE("summary recomputes the ledger from events alone")
{
  LedgerBed bed;
  const auto n = bed.log.intern("node");
  const auto link = bed.log.intern("7:1>2");
  auto a = bed.packet(1000);
  bed.ledger.inject(n, a);
  bed.ledger.replicate(n, a, 3);
  bed.ledger.tx(link, a);
  bed.ledger.deliver(n, a);
  bed.ledger.deliver(n, a);
  bed.ledger.drop(n, a, "link_down");
  auto b = bed.packet(200);
  bed.ledger.inject(n, b);
  bed.ledger.drop(n, b, "ttl");
  const auto s = summarize(bed.log, {});
  CHECK(s.at("bytes.injected") == 1200);
  CHECK(s.at("bytes.replicated") == 2000);
  CHECK(s.at("bytes.delivered") == 2000);
  CHECK(s.at("bytes.dropped") == 1200);
  CHECK(s.at("bytes.in_flight") == 0);
  CHECK(s.at("drops.link_down") == 1);
  CHECK(s.at("drops.ttl") == 1);
  CHECK(s.at("link.7.bytes") == 1000);
  CHECK(bed.ledger.totals().in_flight() == 0);
}

TEST_CASE("format_value")
{
  CHECK(format_value(10) == "10");
  CHECK(format_value(-3) == "-3");
  CHECK(format_value(0.5) == "0.5");
  CHECK(format_value(1e15) == "1000000000000000");
}

TEST_CASE("JSONL and CSV round trips are byte identical")
{
  sim::Scheduler sched;
  EventLog log(&sched);
  const auto a = log.intern("a,\"quoted\"");
  const auto b = log.intern("2:0>1");
  log.emit(EventType::warning, a, {1, 2}, "text with \"quotes\", commas\nand newline");
  sched.schedule(10, [&] { log.emit(EventType::link_state, b, {0}); });
  sched.run_until(10);
  log.add_sample({5, a, "tx_bytes", 42});
  log.add_sample({10, b, "rx,bytes", -7});

  std::ostringstream first;
  write_jsonl(log, first);
  std::istringstream in(first.str());
  const auto back = read_jsonl(in);
  std::ostringstream second;
  write_jsonl(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.hash() == log.hash());
  CHECK(back.dataplane_hash() == log.dataplane_hash());
  CHECK(back.events().size() == 2);
  CHECK(back.samples().size() == 2);

  std::ostringstream csv;
  write_metrics_csv(log, csv);
  std::istringstream csv_in(csv.str());
  const auto rows = read_metrics_csv(csv_in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == CsvSample{5, "a,\"quoted\"", "tx_bytes", 42});
  CHECK(rows[1] == CsvSample{10, "2:0>1", "rx,bytes", -7});

  std::istringstream bad("{\"t\":1,\"ev\":\"no_such_event\",\"el\":\"x\"}\n");
  CHECK_THROWS_AS(read_jsonl(bad), std::runtime_error);
}

TEST_CASE("agents only write samples")
{
  sim::Scheduler sched;
  EventLog log(&sched);
  const auto el = log.intern("x");
  std::int64_t counter = 0;
  Agents on(sched, log, sim::sec(1), true);
  on.add_probe(el, "count", [&] { return counter; });
  on.start(sim::sec(3));
  sched.schedule(sim::msec(1500), [&] { counter = 9; });
  sched.run_until(sim::sec(5));
  CHECK(log.events().empty());
  REQUIRE(log.samples().size() == 4);
  CHECK(log.samples()[1].value == 0);
  CHECK(log.samples()[2].value == 9);

  EventLog quiet(&sched);
  Agents off(sched, quiet, sim::sec(1), false);
  off.add_probe(el, "count", [&] { return counter; });
  off.start(sim::sec(10));
  off.record(el, "count", 1);
  sched.run_until(sim::sec(20));
  CHECK(quiet.samples().empty());
}

TEST_CASE("a real run survives export and import unchanged")
{
  const auto cfg = harness::load_scenario(std::filesystem::path(POINTSIM_SCENARIO_DIR) / "hls_failover.json");
  const auto run = harness::run_scenario(cfg, {harness::Mode::ip, 3, std::nullopt});
  const auto dir = std::filesystem::temp_directory_path() / "pointsim-telemetry-test";
  std::filesystem::create_directories(dir);
  export_log(*run.log, dir / "events.jsonl", Format::jsonl);
  export_log(*run.log, dir / "metrics.csv", Format::csv);
  const auto back = import_jsonl(dir / "events.jsonl");
  CHECK(back.hash() == run.log->hash());
  CHECK(back.events().size() == run.log->events().size());
  CHECK(back.samples().size() == run.log->samples().size());
  CHECK(summarize(back, run.summary_options) == run.summary);
  std::ifstream csv(dir / "metrics.csv");
  CHECK(read_metrics_csv(csv).size() == run.log->samples().size());
  CHECK_THROWS(export_log(*run.log, dir / "missing" / "x.jsonl", Format::jsonl));
  std::filesystem::remove_all(dir);
}
