#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pulsectl/bench/acceptance.hpp"
#include "pulsectl/proto/fd_transport.hpp"
#include "pulsectl/proto/transport.hpp"

using namespace pulsectl;
using namespace pulsectl::bench;

namespace {

SuiteReport run_loopback(ChainModel chain = {}, SuiteConfig config = {}) {
  proto::DeviceEmulator dev(chain);
  proto::LoopbackTransport link(dev);
  proto::HostDriver host(link);
  return run_acceptance_suite(host, dev, config);
}

const CriterionResult& criterion(const SuiteReport& r, const std::string& id) {
  for (const auto& c : r.criteria)
    if (c.id == id) return c;
  FAIL("missing criterion " << id);
  throw std::logic_error("unreachable");
}

// Compares against a pinned file; PULSECTL_UPDATE_GOLDEN=1 rewrites it instead.
void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(PULSECTL_TEST_DATA) + "/" + name;
  if (std::getenv("PULSECTL_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual;
    return;
  }
  std::ifstream in(path);
  REQUIRE_MESSAGE(in, "missing golden file " << path);
  std::ostringstream expected;
  expected << in.rdbuf();
  CHECK(actual == expected.str());
}

}

TEST_CASE("default emulator passes every criterion") {
  const auto report = run_loopback();
  REQUIRE(report.criteria.size() == 7);
  for (const auto& c : report.criteria) {
    CAPTURE(c.id);
    CAPTURE(c.detail);
    CHECK(c.status == CriterionStatus::Pass);
  }
  CHECK(report.all_passed());
  CHECK_FALSE(report.aborted);

  const auto& rail = criterion(report, "rail_limits").measured;
  CHECK(rail["injected_clamp_v"] == 7.0);
  CHECK(rail["unclamped"] == true);
  CHECK(rail["max_vpp_seen_v"].get<double>() <= 10.0);
  CHECK(criterion(report, "protocol").measured["bit_flips_rejected"] == 48);
  CHECK(criterion(report, "protocol").measured["fuzz_inputs"] == 100000);
  CHECK(criterion(report, "amplitude_grid").measured["codes"] == 121);
  CHECK(criterion(report, "delay_grid").measured["codes_checked"] == 31);
}

TEST_CASE("report is deterministic and transport independent") {
  const auto a = report_to_json(run_loopback());
  const auto b = report_to_json(run_loopback());
  CHECK(a == b);

  proto::DeviceEmulator dev;
  proto::TcpDeviceServer server(dev, "127.0.0.1", 0);
  auto tcp = proto::connect_tcp("127.0.0.1", server.port());
  proto::HostDriver host(*tcp);
  const auto c = report_to_json(run_acceptance_suite(host, dev));
  CHECK(a.dump() == c.dump());
}

TEST_CASE("golden report and table") {
  const auto report = run_loopback();
  check_golden("suite_report.golden.json", report_to_json(report).dump(2) + "\n");
  check_golden("suite_table.golden.txt", report_table(report));
}

TEST_CASE("rail mis-set to 5 V fails the rail criterion with the measured value") {
  ChainModel low;
  low.rail_peak = 5.0;
  const auto report = run_loopback(low);
  const auto& rail = criterion(report, "rail_limits");
  CHECK(rail.status == CriterionStatus::Fail);
  CHECK(rail.measured["commanded_peak_v"].get<double>() == 5.0);
  CHECK(rail.detail.find("measured 5.0 V") != std::string::npos);
  CHECK_FALSE(report.all_passed());
  CHECK(criterion(report, "amplitude_grid").status == CriterionStatus::Pass);
  CHECK(criterion(report, "protocol").status == CriterionStatus::Pass);
}

TEST_CASE("unreachable device aborts with the rest not run") {
  proto::DeviceEmulator dev;
  proto::LoopbackTransport link(dev);
  proto::FaultInjectingTransport dead(link);
  dead.drop = [](std::size_t) { return true; };
  proto::HostDriver host(dead);
  const auto report = run_acceptance_suite(host, dev);
  CHECK(report.aborted);
  CHECK_FALSE(report.abort_reason.empty());
  REQUIRE(report.criteria.size() == 7);
  CHECK(report.criteria[0].status == CriterionStatus::NotRun);
  for (const auto& c : report.criteria) CHECK(c.status == CriterionStatus::NotRun);
  const auto j = report_to_json(report);
  CHECK(j["aborted"] == true);
  CHECK(j["not_run"] == 7);
  CHECK(report_table(report).find("ABORTED") != std::string::npos);
}

TEST_CASE("short fuzz runs are reported as failing the protocol criterion") {
  SuiteConfig cfg;
  cfg.fuzz_iterations = 1000;
  const auto report = run_loopback({}, cfg);
  CHECK(criterion(report, "protocol").status == CriterionStatus::Fail);
}
