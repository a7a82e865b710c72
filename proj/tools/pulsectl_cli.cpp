#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulsectl/bench/acceptance.hpp"
#include "pulsectl/bench/capture.hpp"
#include "pulsectl/bench/control_api.hpp"
#include "pulsectl/bench/json_codec.hpp"
#include "pulsectl/device/channel_map.hpp"
#include "pulsectl/link/channel_model.hpp"
#include "pulsectl/planner/plan_io.hpp"
#include "pulsectl/proto/fd_transport.hpp"
#include "pulsectl/proto/host_driver.hpp"
#include "pulsectl/signal/waveform_io.hpp"

using namespace pulsectl;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

ChannelId resolve_channel(const std::string& label, const std::string& map_path) {
  const auto map = map_path.empty() ? ChannelMap::canonical() : ChannelMap::load(map_path);
  if (auto id = map.resolve(label)) return *id;
  throw std::runtime_error("unknown channel '" + label + "'");
}

struct CaptureArgs {
  std::string channel = "AC1";
  std::string channel_map;
  int amp = 120;
  int delay = 0;
  double width = PulseTiming{}.width;
  double start = PulseTiming{}.start;
  double sample_rate = CaptureConfig{}.sample_rate;
  double window = CaptureConfig{}.window;
  std::string output;
};

int run_capture(const CaptureArgs& a) {
  proto::DeviceEmulator device;
  proto::LoopbackTransport link(device);
  proto::HostDriver host(link);
  const auto channel = resolve_channel(a.channel, a.channel_map);
  host.set_channel(channel, AmplitudeCode(a.amp), DelayCode(a.delay));
  host.set_enabled(channel, true);

  CaptureConfig config;
  config.sample_rate = a.sample_rate;
  config.window = a.window;
  const auto result = bench::capture_channel(device, channel, config, PulseTiming{a.start, a.width});
  if (!a.output.empty()) save_waveform(a.output, result.waveform, encoding_for_path(a.output));
  json out = {{"channel", channel.label()},
              {"settings", bench::to_json(result.settings)},
              {"report", bench::to_json(result.report)}};
  if (!a.output.empty()) out["output"] = a.output;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_measure(const std::string& input, const std::string& reference) {
  const auto w = load_waveform(input);
  std::optional<Waveform> ref;
  if (!reference.empty()) ref = load_waveform(reference);
  const auto report = bench::measure(w, ref ? &*ref : nullptr, ChainModel{});
  std::cout << bench::to_json(report).dump(2) << '\n';
  return 0;
}

struct AcceptArgs {
  std::string transport = "loopback";
  bool json_out = false;
  double rail = default_limits.rail_peak_volts;
  std::string channel = "AC1";
  std::size_t fuzz = bench::criteria::fuzz_iterations;
};

int run_accept(const AcceptArgs& a) {
  ChainModel chain;
  chain.rail_peak = a.rail;
  proto::DeviceEmulator device(chain);
  bench::SuiteConfig config;
  config.channel = resolve_channel(a.channel, "");
  config.fuzz_iterations = a.fuzz;

  bench::SuiteReport report;
  if (a.transport == "loopback") {
    proto::LoopbackTransport link(device);
    proto::HostDriver host(link);
    report = bench::run_acceptance_suite(host, device, config);
  } else if (a.transport == "tcp") {
    proto::TcpDeviceServer server(device, "127.0.0.1", 0);
    auto link = proto::connect_tcp("127.0.0.1", server.port());
    proto::HostDriver host(*link);
    report = bench::run_acceptance_suite(host, device, config);
  } else {
    throw std::runtime_error("transport must be loopback or tcp");
  }

  if (a.json_out) std::cout << bench::report_to_json(report).dump(2) << '\n';
  else std::cout << bench::report_table(report);
  return report.all_passed() ? 0 : 1;
}

int run_plan(const std::string& input, bool replay, bool show_commands) {
  const auto symbols = planner::parse_symbols(read_file(input));
  const planner::ModulatorCalibration cal;
  const auto seq = planner::plan_sequence(symbols, cal);
  std::cout << planner::format_plan(seq.plan);
  if (show_commands) {
    for (const auto& c : seq.commands) {
      std::cout << "> " << to_string(c.opcode);
      if (proto::is_channel_scoped(c.opcode)) std::cout << ' ' << ChannelId::from_wire(c.channel).label();
      std::cout << ' ' << (c.opcode == proto::Opcode::SetDelay ? proto::payload_to_delay(c.payload).value : c.payload)
                << '\n';
    }
  }
  if (!replay) return 0;

  proto::DeviceEmulator device;
  proto::LoopbackTransport link(device);
  proto::HostDriver host(link);
  std::size_t acked = 0;
  for (const auto& c : seq.commands)
    if (host.transact(c).ok()) ++acked;
  const auto state = device.snapshot();
  bool match = state.pattern && state.pattern->size() == seq.plan.slots.size();
  for (std::size_t k = 0; match && k < seq.plan.slots.size(); ++k)
    match = (*state.pattern)[k] == planner::slot_bank(seq.plan.slots[k]);
  std::cout << "replay: " << acked << '/' << seq.commands.size() << " acknowledged, "
            << (state.pattern ? state.pattern->size() : 0) << " slots loaded, armed=" << (state.armed ? 1 : 0)
            << ", pattern " << (match ? "matches" : "DIFFERS FROM") << " plan\n";
  return match && acked == seq.commands.size() ? 0 : 1;
}

struct LinkArgs {
  double alpha = 0.2;
  double d_ref = 1.0;
  double loss_ref = 0.0;
  double d_min = 1.0;
  double d_max = 500.0;
  int points = 50;
  bool json_out = false;
};

int run_linkbudget(const LinkArgs& a) {
  const link::FiberChannel fiber{a.alpha};
  const link::FreeSpaceChannel fs{a.d_ref, a.loss_ref};
  const auto rows = link::link_budget_table(fiber, fs, a.d_min, a.d_max, a.points);
  std::optional<double> crossover;
  std::string no_crossover;
  try {
    crossover = link::crossover_distance(fiber, fs);
  } catch (const link::NoCrossover& e) {
    no_crossover = e.what();
  }

  if (a.json_out) {
    json table = json::array();
    for (const auto& r : rows)
      table.push_back({{"distance_km", r.distance_km}, {"fiber_db", r.fiber_db}, {"freespace_db", r.freespace_db}});
    json out = {{"alpha_db_per_km", a.alpha}, {"d_ref_km", a.d_ref}, {"loss_at_ref_db", a.loss_ref}, {"rows", table}};
    out["crossover_km"] = crossover ? json(*crossover) : json(nullptr);
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << "distance_km,fiber_db,freespace_db\n" << std::setprecision(9);
  for (const auto& r : rows) std::cout << r.distance_km << ',' << r.fiber_db << ',' << r.freespace_db << '\n';
  if (crossover) std::cout << "# crossover_km=" << std::fixed << std::setprecision(6) << *crossover << '\n';
  else std::cout << "# crossover_km=none (" << no_crossover << ")\n";
  return 0;
}

int run_serve(const std::string& bind, uint16_t port, int device_port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  proto::DeviceEmulator device;
  bench::ControlApiServer api(device, bind, port);
  std::unique_ptr<proto::TcpDeviceServer> frames;
  if (device_port >= 0) frames = std::make_unique<proto::TcpDeviceServer>(device, bind, static_cast<uint16_t>(device_port));
  std::cout << "control api on http://" << bind << ':' << api.port() << " (events: ws://" << bind << ':' << api.port()
            << "/api/events)\n";
  if (frames) std::cout << "device frames on tcp://" << bind << ':' << frames->port() << '\n';
  std::cout.flush();

  int sig = 0;
  sigwait(&signals, &sig);
  api.stop();
  if (frames) frames->stop();
  return 0;
}

}

int main(int argc, char** argv) {
  CLI::App app{"Pulse generator control, emulation and bench tools"};
  app.require_subcommand(1);

  CaptureArgs cap;
  auto* capture = app.add_subcommand("capture", "Drive one output on the emulator and capture it");
  capture->add_option("-c,--channel", cap.channel, "Output label")->capture_default_str();
  capture->add_option("--channel-map", cap.channel_map, "Channel map file");
  capture->add_option("-a,--amp", cap.amp, "Amplitude code 0..120")->capture_default_str();
  capture->add_option("-d,--delay", cap.delay, "Delay code -150..150")->capture_default_str();
  capture->add_option("-w,--width", cap.width, "Pulse width [s]")->capture_default_str();
  capture->add_option("--start", cap.start, "Pulse start [s]")->capture_default_str();
  capture->add_option("-r,--sample-rate", cap.sample_rate, "Samples per second")->capture_default_str();
  capture->add_option("--window", cap.window, "Capture window [s]")->capture_default_str();
  capture->add_option("-o,--output", cap.output, "Waveform file (.csv, or .bin/.pcwf for binary)");

  std::string measure_input, measure_reference;
  auto* measure = app.add_subcommand("measure", "Measure a waveform file");
  measure->add_option("input", measure_input, "Waveform file")->required();
  measure->add_option("--reference", measure_reference, "Reference waveform for the delay");

  AcceptArgs acc;
  auto* accept = app.add_subcommand("accept", "Run the acceptance suite against the emulator");
  accept->add_option("-t,--transport", acc.transport, "loopback or tcp")->capture_default_str();
  accept->add_flag("--json", acc.json_out, "Machine-readable report");
  accept->add_option("--rail", acc.rail, "Emulated output rail [V]")->capture_default_str();
  accept->add_option("-c,--channel", acc.channel, "Output under test")->capture_default_str();
  accept->add_option("--fuzz", acc.fuzz, "Fuzz inputs for the protocol criterion")->capture_default_str();

  std::string plan_input;
  bool plan_replay = false, plan_commands = false;
  auto* plan = app.add_subcommand("plan", "Plan a symbol file and optionally replay it");
  plan->add_option("input", plan_input, "Symbol file")->required();
  plan->add_flag("--replay", plan_replay, "Load the plan into an emulator and verify it");
  plan->add_flag("--commands", plan_commands, "Print the command stream");

  LinkArgs la;
  auto* linkbudget = app.add_subcommand("linkbudget", "Fiber vs free-space loss table");
  linkbudget->add_option("--alpha", la.alpha, "Fiber attenuation [dB/km]")->capture_default_str();
  linkbudget->add_option("--d-ref", la.d_ref, "Free-space reference distance [km]")->capture_default_str();
  linkbudget->add_option("--loss-ref", la.loss_ref, "Free-space loss at the reference [dB]")->capture_default_str();
  linkbudget->add_option("--min", la.d_min, "First distance [km]")->capture_default_str();
  linkbudget->add_option("--max", la.d_max, "Last distance [km]")->capture_default_str();
  linkbudget->add_option("--points", la.points, "Rows")->capture_default_str();
  linkbudget->add_flag("--json", la.json_out, "Machine-readable table");

  std::string bind = "127.0.0.1";
  uint16_t port = 8080;
  int device_port = -1;
  auto* serve = app.add_subcommand("serve", "Serve the control API for an emulator");
  serve->add_option("-b,--bind", bind, "Bind address")->capture_default_str();
  serve->add_option("-p,--port", port, "Control API port (0 picks one)")->capture_default_str();
  serve->add_option("--device-port", device_port, "Also serve raw device frames over TCP on this port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*capture) return run_capture(cap);
    if (*measure) return run_measure(measure_input, measure_reference);
    if (*accept) return run_accept(acc);
    if (*plan) return run_plan(plan_input, plan_replay, plan_commands);
    if (*linkbudget) return run_linkbudget(la);
    if (*serve) return run_serve(bind, port, device_port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
