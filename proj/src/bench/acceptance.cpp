#include "pulsectl/bench/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "pulsectl/bench/capture.hpp"
#include "pulsectl/bench/measure.hpp"
#include "pulsectl/link/channel_model.hpp"
#include "pulsectl/proto/frame.hpp"

namespace pulsectl::bench {

using nlohmann::json;
using proto::Command;
using proto::Opcode;

namespace {

class Abort: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Outcome {
  bool passed = true;
  std::string detail;
  json measured = json::object();

  void require(bool ok, const std::string& why) {
    if (ok) return;
    if (passed) detail = why;
    passed = false;
  }
};

// Decimal value of a code, built from integer millivolts and parsed back.
double decimal_volts(int code) {
  const int mv = code * 50;
  std::ostringstream text;
  text << mv / 1000 << '.' << std::setw(3) << std::setfill('0') << mv % 1000;
  const auto s = text.str();
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

class Bench {
  public:
    Bench(proto::HostDriver& control, const proto::DeviceEmulator& probe, const SuiteConfig& config)
        : control_(control), probe_(probe), config_(config) {}

    CaptureResult capture() {
      auto result = capture_channel(probe_, config_.channel, config_.capture, config_.timing);
      max_vpp_ = std::max(max_vpp_, result.report.vpp);
      ++captures_;
      return result;
    }

    void drive(AmplitudeCode amp, DelayCode delay, bool enabled) {
      control_.set_channel(config_.channel, amp, delay);
      control_.set_enabled(config_.channel, enabled);
    }

    Outcome amplitude_grid();
    Outcome delay_grid();
    Outcome rise_time();
    Outcome rail_limits();
    Outcome protocol();
    Outcome planner();
    Outcome channel_model();

  private:
    proto::HostDriver& control_;
    const proto::DeviceEmulator& probe_;
    const SuiteConfig& config_;
    double max_vpp_ = 0.0;
    int captures_ = 0;
};

Outcome Bench::amplitude_grid() {
  Outcome out;
  int codes = 0, exact = 0, round_trips = 0, readbacks = 0;
  for (int c = 0; c <= DeviceLimits::amplitude_code_max; ++c) {
    ++codes;
    const AmplitudeCode code(c);
    const double volts = amplitude_code_to_volts(code);
    if (amplitude_code_to_millivolts(code) == 50 * c && volts == decimal_volts(c)) ++exact;
    if (volts_to_amplitude_code(volts) == code) ++round_trips;
    control_.set_amplitude(config_.channel, code);
    if (control_.get_amplitude(config_.channel) == code) ++readbacks;
  }
  out.measured = {{"codes", codes}, {"exact", exact}, {"round_trips", round_trips}, {"device_readbacks", readbacks}};
  out.require(codes == 121, "grid does not have 121 codes");
  out.require(exact == codes, "some codes do not map exactly onto the 0.05 V grid");
  out.require(round_trips == codes, "code -> volts -> code is not the identity");
  out.require(readbacks == codes, "device read back a different amplitude code");
  if (out.passed) out.detail = "121/121 codes exact, round trip and device readback identical";
  return out;
}

Outcome Bench::delay_grid() {
  Outcome out;
  const auto started = std::chrono::steady_clock::now();
  int grid = 0;
  for (int c = DeviceLimits::delay_code_min; c <= DeviceLimits::delay_code_max; ++c) {
    if (delay_code_to_picoseconds(DelayCode(c)) == 100 * c) ++grid;
  }
  out.require(grid == 301, "delay grid does not have 301 exact codes");

  drive(AmplitudeCode(DeviceLimits::amplitude_code_max), DelayCode(0), true);
  const auto reference = capture().waveform;
  double worst = 0.0;
  int checked = 0;
  int worst_code = 0;
  for (int c = DeviceLimits::delay_code_min; c <= DeviceLimits::delay_code_max; c += 10) {
    control_.set_delay(config_.channel, DelayCode(c));
    const auto shot = capture();
    const auto measured = measure_delay(reference, shot.waveform);
    ++checked;
    if (!measured) {
      out.require(false, "code " + std::to_string(c) + ": " + measured.reason());
      continue;
    }
    const double err = std::abs(*measured - c * 100e-12);
    if (err > worst) {
      worst = err;
      worst_code = c;
    }
  }
  control_.set_delay(config_.channel, DelayCode(0));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.measured = {{"codes_checked", checked}, {"grid_codes", grid}, {"max_abs_error_s", worst},
                  {"worst_code", worst_code}};
  out.require(worst <= criteria::delay_tolerance_s,
              "shift error " + std::to_string(worst * 1e12) + " ps at code " + std::to_string(worst_code));
  out.require(elapsed < criteria::delay_runtime_limit_s, "delay sweep exceeded 10 s");
  if (out.passed) out.detail = "31 codes within 25 ps; 301 grid codes exact";
  return out;
}

Outcome Bench::rise_time() {
  Outcome out;
  drive(AmplitudeCode(DeviceLimits::amplitude_code_max), DelayCode(0), true);
  const auto rise = capture().report.rise_time_10_90;

  auto control_chain = probe_.chain();
  control_chain.tau = criteria::rise_control_tau_s;
  control_chain.noise_sigma = 0.0;
  const ChannelSettings wide{config_.channel, AmplitudeCode(DeviceLimits::amplitude_code_max), DelayCode(0), true};
  const auto control_rise = measure_rise_time(synthesize(wide, config_.timing, control_chain, config_.capture));
  const double control_expected = criteria::rise_control_tau_s * std::log(9.0);

  out.measured = {{"default_rise_s", rise ? json(*rise) : json(nullptr)},
                  {"control_rise_s", control_rise ? json(*control_rise) : json(nullptr)},
                  {"control_expected_s", control_expected}};
  out.require(rise && std::abs(*rise - criteria::rise_nominal_s) <= criteria::rise_nominal_rel_tol * criteria::rise_nominal_s,
              "default edge rise time outside 1.00 ns +/- 2 %");
  out.require(control_rise && std::abs(*control_rise - control_expected) <= criteria::rise_control_rel_tol * control_expected,
              "tau = 1 ns control rise outside 2.197 ns +/- 1 %");
  if (out.passed) out.detail = "default 1.00 ns +/- 2 %, control tau*ln9 +/- 1 %";
  return out;
}

Outcome Bench::rail_limits() {
  Outcome out;
  const auto chain = probe_.chain();
  drive(AmplitudeCode(DeviceLimits::amplitude_code_max), DelayCode(0), true);
  const auto shot = capture();

  // Same settings with the rail out of the way.
  auto open_chain = chain;
  open_chain.rail_peak = std::numeric_limits<double>::infinity();
  const auto unclamped = synthesize(shot.settings, config_.timing, open_chain, config_.capture);
  const double expected_peak = default_limits.max_volts * -std::expm1(-config_.timing.width / chain.tau);
  const bool untouched = unclamped.samples() == shot.waveform.samples();

  // Synthetic 8 V plateau straight into the output stage.
  const auto n = static_cast<std::size_t>(std::llround(config_.capture.window * config_.capture.sample_rate));
  std::vector<double> plateau(n, 0.0);
  for (std::size_t i = n / 4; i < n / 2; ++i) plateau[i] = criteria::injected_plateau_v;
  const auto clamped = apply_output_stage(Waveform(config_.capture.sample_rate, 0.0, plateau), chain);
  const double clamp_peak = *std::max_element(clamped.samples().begin(), clamped.samples().end());

  out.measured = {{"commanded_peak_v", shot.report.peak},
                  {"expected_peak_v", expected_peak},
                  {"unclamped", untouched},
                  {"injected_clamp_v", clamp_peak},
                  {"max_vpp_seen_v", max_vpp_},
                  {"captures", captures_},
                  {"vpp_capability_v", chain.max_vpp_into_load}};
  std::ostringstream peak;
  peak << std::fixed << std::setprecision(1) << shot.report.peak;
  out.require(untouched && shot.report.peak >= expected_peak * (1 - 1e-9),
              "commanded 6 V plateau was clipped: measured " + peak.str() + " V");
  out.require(clamp_peak == default_limits.rail_peak_volts, "8 V injection did not clamp to exactly 7.0 V");
  out.require(max_vpp_ <= chain.max_vpp_into_load, "a capture exceeded the configured Vpp capability");
  if (out.passed) out.detail = "6 V plateau un-clamped, 8 V clamps to 7.0 V, all captures within Vpp capability";
  return out;
}

Outcome Bench::protocol() {
  Outcome out;
  const auto started = std::chrono::steady_clock::now();

  // Exhaustive round trip over opcodes x channels x boundary payloads.
  std::size_t round_trips = 0, round_trip_failures = 0, illegal_accepted = 0;
  for (auto op : proto::all_opcodes) {
    const uint16_t top = proto::max_payload(op);
    std::set<uint16_t> payloads{0, top};
    if (top >= 1) payloads.insert({1, static_cast<uint16_t>(top - 1)});
    std::vector<uint8_t> chans;
    if (proto::is_channel_scoped(op)) {
      for (uint8_t ch = 0; ch < channel_count; ++ch) chans.push_back(ch);
    } else {
      chans.push_back(proto::device_wide);
    }
    for (auto ch : chans) {
      for (auto p : payloads) {
        const Command c{op, ch, p};
        const auto frame = proto::encode_frame(c);
        const auto back = proto::decode_frame(frame);
        ++round_trips;
        if (!std::holds_alternative<Command>(back) || std::get<Command>(back) != c) ++round_trip_failures;
      }
      if (top < 0xFFFF && proto::check_command({op, ch, static_cast<uint16_t>(top + 1)}) == std::nullopt)
        ++illegal_accepted;
    }
  }

  // Fuzz: arbitrary byte strings, half of them starting with a SOF byte.
  std::mt19937_64 rng(config_.seed);
  std::uniform_int_distribution<int> byte(0, 255), length(0, 12);
  std::size_t crashes = 0, illegal_decoded = 0;
  proto::FrameScanner scanner;
  for (std::size_t i = 0; i < config_.fuzz_iterations; ++i) {
    std::vector<uint8_t> bytes(static_cast<std::size_t>(length(rng)));
    for (auto& b : bytes) b = static_cast<uint8_t>(byte(rng));
    if (!bytes.empty() && (i & 1)) bytes[0] = proto::command_sof;
    try {
      const auto r = proto::decode_frame(bytes);
      if (auto* c = std::get_if<Command>(&r); c && proto::check_command(*c)) ++illegal_decoded;
      scanner.feed(bytes);
      while (auto e = scanner.next()) {
        if (auto* c = std::get_if<Command>(&e->item); c && proto::check_command(*c)) ++illegal_decoded;
      }
    } catch (...) {
      ++crashes;
    }
  }

  // Every single-bit corruption of a valid frame.
  const auto valid = proto::encode_frame({Opcode::SetAmplitude, 3, 120});
  int rejected = 0;
  for (int bit = 0; bit < 48; ++bit) {
    auto corrupt = valid;
    corrupt[static_cast<std::size_t>(bit / 8)] ^= static_cast<uint8_t>(1u << (bit % 8));
    if (std::holds_alternative<proto::DecodeFailure>(proto::decode_frame(corrupt))) ++rejected;
  }

  // The device NAKs a corrupted frame and keeps its state.
  auto before = probe_.snapshot();
  auto corrupt = proto::encode_frame({Opcode::SetAmplitude, config_.channel.wire_index(), 7});
  corrupt[4] ^= 0x01;
  auto& link = control_.transport();
  link.discard_input();
  link.send(corrupt);
  const auto reply_bytes = link.receive(proto::frame_size, std::chrono::milliseconds(500));
  if (!reply_bytes) throw Abort("device did not answer a corrupted frame");
  const auto reply = proto::decode_reply(*reply_bytes);
  const bool nak = std::holds_alternative<proto::Reply>(reply) &&
                   std::get<proto::Reply>(reply).status == proto::ReplyStatus::NakBadCrc;
  auto after = probe_.snapshot();
  before.uptime_ms = after.uptime_ms = 0;

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.measured = {{"round_trips", round_trips},         {"round_trip_failures", round_trip_failures},
                  {"illegal_accepted", illegal_accepted}, {"fuzz_inputs", config_.fuzz_iterations},
                  {"fuzz_crashes", crashes},            {"fuzz_illegal_decoded", illegal_decoded},
                  {"bit_flips_rejected", rejected},      {"device_nak_bad_crc", nak},
                  {"device_state_unchanged", before == after}};
  out.require(round_trip_failures == 0, "decode(encode(c)) != c for some command");
  out.require(illegal_accepted == 0, "an out-of-range payload passed validation");
  out.require(crashes == 0 && illegal_decoded == 0, "decoder misbehaved on fuzz input");
  out.require(rejected == 48, "a single-bit corruption was accepted");
  out.require(nak && before == after, "device did not NAK(BadCrc) a corrupted frame with state unchanged");
  out.require(config_.fuzz_iterations >= criteria::fuzz_iterations, "fuzz run shorter than 1e5 inputs");
  out.require(elapsed < criteria::protocol_runtime_limit_s, "protocol checks exceeded 30 s");
  if (out.passed) out.detail = std::to_string(round_trips) + " round trips, 1e5 fuzz inputs, 48/48 bit flips rejected";
  return out;
}

Outcome Bench::planner() {
  Outcome out;
  const auto& cal = config_.calibration;
  const double v_pi = cal.v_pi_of(ChannelGroup::Decoy);
  const double bound = std::numbers::pi / (2.0 * v_pi) * 0.05;

  double achieved[3] = {};
  double worst_error = 0.0;
  const planner::Intensity classes[3] = {planner::Intensity::Vacuum, planner::Intensity::Decoy,
                                         planner::Intensity::Signal};
  for (int i = 0; i < 3; ++i) {
    const auto slot = planner::plan_symbol({classes[i], planner::Basis::Z, 0}, cal);
    achieved[i] = planner::decoy_transmission(slot, cal);
    const double target = cal.intensity_target(classes[i]) / cal.mu;
    worst_error = std::max(worst_error, std::abs(achieved[i] - target));
  }

  std::vector<planner::QkdSymbol> symbols;
  for (auto cls : classes)
    for (auto basis : {planner::Basis::Z, planner::Basis::X})
      for (int bit : {0, 1}) symbols.push_back({cls, basis, bit});
  const auto seq = planner::plan_sequence(symbols, cal);
  std::size_t acked = 0;
  for (const auto& c : seq.commands)
    if (control_.transact(c).ok()) ++acked;
  const auto state = probe_.snapshot();
  bool replay_ok = state.pattern.has_value() && state.pattern->size() == seq.plan.slots.size();
  if (replay_ok) {
    for (std::size_t k = 0; k < seq.plan.slots.size(); ++k)
      replay_ok = replay_ok && (*state.pattern)[k] == planner::slot_bank(seq.plan.slots[k]);
  }
  // Leave the device disarmed.
  if (state.armed) control_.arm();

  out.measured = {{"t_vacuum", achieved[0]},          {"t_decoy", achieved[1]},
                  {"t_signal", achieved[2]},          {"max_quantization_error", worst_error},
                  {"quantization_bound", bound},      {"commands", seq.commands.size()},
                  {"acked", acked},                   {"replay_matches_plan", replay_ok}};
  out.require(achieved[0] == 0.0 && achieved[0] < achieved[1] && achieved[1] < achieved[2],
              "transmissions are not ordered 0 = vacuum < decoy < signal");
  out.require(worst_error <= bound, "quantisation error above (pi / (2 v_pi)) * 0.05");
  out.require(acked == seq.commands.size(), "device refused part of the plan's command stream");
  out.require(replay_ok, "replayed device pattern differs from the plan");
  if (out.passed) out.detail = "0 = T_vac < T_decoy < T_signal within the quantisation bound; replay exact";
  return out;
}

Outcome Bench::channel_model() {
  Outcome out;
  const link::FiberChannel fiber{0.2};
  const link::FreeSpaceChannel fs{1.0, 0.0};
  const double log2_db = 20.0 * std::log10(2.0);
  double worst_fiber = 0.0, worst_fs = 0.0;
  for (int i = 0; i < criteria::link_grid_points; ++i) {
    const double d = 1.0 + 10.0 * i;
    worst_fiber = std::max(worst_fiber, std::abs(link::fiber_loss_db(2 * d, fiber) - 2 * link::fiber_loss_db(d, fiber)));
    worst_fs = std::max(worst_fs,
                        std::abs(link::freespace_loss_db(2 * d, fs) - link::freespace_loss_db(d, fs) - log2_db));
  }
  const double d_star = link::crossover_distance(fiber, fs);
  const double residual = std::abs(link::fiber_loss_db(d_star, fiber) - link::freespace_loss_db(d_star, fs));
  out.measured = {{"grid_points", criteria::link_grid_points},
                  {"fiber_doubling_error_db", worst_fiber},
                  {"freespace_doubling_error_db", worst_fs},
                  {"crossover_km", d_star},
                  {"oracle_km", criteria::crossover_oracle_km},
                  {"residual_db", residual}};
  out.require(worst_fiber <= 1e-9 && worst_fs <= 1e-9, "dB growth contrast does not hold on the grid");
  out.require(std::abs(d_star - criteria::crossover_oracle_km) <= criteria::crossover_tolerance_km,
              "crossover differs from the oracle by more than 1 m");
  out.require(residual <= criteria::crossover_residual_db, "losses differ by more than 0.001 dB at the crossover");
  if (out.passed) out.detail = "linear vs logarithmic dB growth; crossover within 1 m of 237.581 km";
  return out;
}

}

bool SuiteReport::all_passed() const {
  if (aborted || criteria.empty()) return false;
  for (const auto& c : criteria)
    if (c.status != CriterionStatus::Pass) return false;
  return true;
}

std::string_view to_string(CriterionStatus s) {
  switch (s) {
    case CriterionStatus::Pass: return "PASS";
    case CriterionStatus::Fail: return "FAIL";
    case CriterionStatus::NotRun: return "NOT RUN";
  }
  return "?";
}

SuiteReport run_acceptance_suite(proto::HostDriver& control, const proto::DeviceEmulator& probe,
                                 const SuiteConfig& config) {
  Bench bench(control, probe, config);
  struct Step {
    const char* id;
    const char* title;
    Outcome (Bench::*run)();
  };
  const Step steps[] = {
      {"amplitude_grid", "Amplitude grid 0-6 V in 0.05 V steps", &Bench::amplitude_grid},
      {"delay_grid", "Delay grid +/-15 ns in 100 ps steps", &Bench::delay_grid},
      {"rise_time", "10-90 % rise time about 1 ns", &Bench::rise_time},
      {"rail_limits", "7 V rail and 10 Vpp capability", &Bench::rail_limits},
      {"protocol", "Frame codec round trip, fuzz and bit-error detection", &Bench::protocol},
      {"planner", "Decoy-state intensity ordering and plan replay", &Bench::planner},
      {"channel_model", "Fiber vs free-space loss growth and crossover", &Bench::channel_model},
  };

  SuiteReport report;
  for (const auto& step : steps) {
    CriterionResult result{step.id, step.title, CriterionStatus::NotRun, {}, json::object(), 0.0};
    if (report.aborted) {
      result.detail = "not run: suite aborted";
      report.criteria.push_back(std::move(result));
      continue;
    }
    const auto started = std::chrono::steady_clock::now();
    try {
      auto outcome = (bench.*step.run)();
      result.status = outcome.passed ? CriterionStatus::Pass : CriterionStatus::Fail;
      result.detail = std::move(outcome.detail);
      result.measured = std::move(outcome.measured);
    } catch (const proto::ProtocolError& e) {
      report.aborted = true;
      report.abort_reason = e.what();
    } catch (const proto::TransportError& e) {
      report.aborted = true;
      report.abort_reason = e.what();
    } catch (const Abort& e) {
      report.aborted = true;
      report.abort_reason = e.what();
    } catch (const std::exception& e) {
      result.status = CriterionStatus::Fail;
      result.detail = std::string("error: ") + e.what();
    }
    if (report.aborted) result.detail = "aborted: " + report.abort_reason;
    result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.criteria.push_back(std::move(result));
  }
  return report;
}

json report_to_json(const SuiteReport& report) {
  json criteria = json::array();
  int passed = 0, failed = 0, not_run = 0;
  for (const auto& c : report.criteria) {
    criteria.push_back({{"id", c.id},
                        {"title", c.title},
                        {"status", to_string(c.status)},
                        {"detail", c.detail},
                        {"measured", c.measured}});
    (c.status == CriterionStatus::Pass ? passed : c.status == CriterionStatus::Fail ? failed : not_run)++;
  }
  json out = {{"suite", "pulsectl-acceptance"},
              {"aborted", report.aborted},
              {"all_passed", report.all_passed()},
              {"passed", passed},
              {"failed", failed},
              {"not_run", not_run},
              {"criteria", criteria}};
  if (report.aborted) out["abort_reason"] = report.abort_reason;
  return out;
}

std::string report_table(const SuiteReport& report) {
  std::ostringstream out;
  for (const auto& c : report.criteria) {
    out << std::left << std::setw(8) << to_string(c.status) << std::setw(16) << c.id << c.title;
    if (!c.detail.empty()) out << "\n        " << c.detail;
    out << '\n';
  }
  if (report.aborted) out << "ABORTED: " << report.abort_reason << '\n';
  out << (report.all_passed() ? "all criteria passed" : "some criteria did not pass") << '\n';
  return out.str();
}

}
