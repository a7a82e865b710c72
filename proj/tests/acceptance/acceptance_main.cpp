#include <cstdio>
#include <iostream>
#include <string>

#include <sys/wait.h>

#include "pulsectl/bench/acceptance.hpp"
#include "pulsectl/proto/fd_transport.hpp"

using namespace pulsectl;
using nlohmann::json;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  CliRun r;
  const std::string cmd = std::string(PULSECTL_CLI_PATH) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void line(bool ok, const std::string& title, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << title << "  -- " << detail << '\n';
}

}

int main() {
  proto::DeviceEmulator loop_dev;
  proto::LoopbackTransport loop(loop_dev);
  proto::HostDriver loop_host(loop);
  const auto report = bench::run_acceptance_suite(loop_host, loop_dev);

  proto::DeviceEmulator tcp_dev;
  proto::TcpDeviceServer server(tcp_dev, "127.0.0.1", 0);
  auto tcp = proto::connect_tcp("127.0.0.1", server.port());
  proto::HostDriver tcp_host(*tcp);
  const auto tcp_report = bench::run_acceptance_suite(tcp_host, tcp_dev);

  bool all = true;
  for (std::size_t i = 0; i < report.criteria.size(); ++i) {
    const auto& c = report.criteria[i];
    const bool tcp_ok = i < tcp_report.criteria.size() && tcp_report.criteria[i].status == bench::CriterionStatus::Pass;
    const bool ok = c.status == bench::CriterionStatus::Pass && tcp_ok;
    all = all && ok;
    std::string detail = c.detail;
    if (!tcp_ok) detail += " (tcp: " + (i < tcp_report.criteria.size() ? tcp_report.criteria[i].detail : "missing") + ")";
    line(ok, c.title, detail);
  }
  if (report.aborted) {
    all = false;
    line(false, "Suite completed", report.abort_reason);
  }

  const auto via_loopback = run_cli("accept --json --transport loopback");
  const auto via_tcp = run_cli("accept --json --transport tcp");
  const auto parsed = json::parse(via_loopback.out, nullptr, false);
  const bool identical = !via_loopback.out.empty() && via_loopback.out == via_tcp.out;
  const bool all_pass = !parsed.is_discarded() && parsed.value("all_passed", false);
  const bool exits = via_loopback.exit_code == 0 && via_tcp.exit_code == 0;
  const bool in_process = bench::report_to_json(report) == bench::report_to_json(tcp_report);
  const bool e2e = identical && all_pass && exits && in_process;
  all = all && e2e;
  line(e2e, "End-to-end: accept CLI over loopback and TCP",
       std::string(identical ? "identical" : "different") + " reports, " + (all_pass ? "all pass" : "not all pass") +
           ", exit codes " + std::to_string(via_loopback.exit_code) + "/" + std::to_string(via_tcp.exit_code));

  std::cout << (all ? "ALL PRIMARY CRITERIA PASS" : "SOME PRIMARY CRITERIA FAIL") << '\n';
  return all ? 0 : 1;
}
