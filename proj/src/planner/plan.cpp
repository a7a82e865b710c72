#include "pulsectl/planner/plan.hpp"

#include <cmath>
#include <numbers>

namespace pulsectl::planner {

using proto::Command;
using proto::Opcode;

std::string_view to_string(Intensity i) {
  switch (i) {
    case Intensity::Signal: return "signal";
    case Intensity::Decoy: return "decoy";
    case Intensity::Vacuum: return "vacuum";
  }
  return "?";
}

std::string_view to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

double ModulatorCalibration::intensity_target(Intensity i) const {
  switch (i) {
    case Intensity::Signal: return mu;
    case Intensity::Decoy: return nu;
    case Intensity::Vacuum: return 0.0;
  }
  return 0.0;
}

DelayCode ModulatorCalibration::late_bin_delay() const {
  return DelayCode(static_cast<int>(std::lround(bin_separation / default_limits.delay_step)));
}

void ModulatorCalibration::validate() const {
  for (double v : v_pi)
    if (!(v > 0.0)) throw std::invalid_argument("v_pi must be positive for every group");
  if (!(nu >= 0.0) || !(mu > nu)) throw std::invalid_argument("intensities need mu > nu >= 0");
  if (!(slot_period > 0.0) || !(bin_width > 0.0) || !(early_bin_start >= 0.0))
    throw std::invalid_argument("slot period and bin width must be positive");
  if (!(bin_separation >= bin_width) || !(bin_separation < slot_period))
    throw std::invalid_argument("bin separation must lie in [bin_width, slot_period)");
  const double steps = bin_separation / default_limits.delay_step;
  if (std::abs(steps - std::round(steps)) > 1e-6 || !late_bin_delay().valid())
    throw std::invalid_argument("bin separation must be a multiple of 100 ps within 15 ns");
  if (early_bin_start + bin_separation + bin_width > slot_period * (1 + 1e-12))
    throw std::invalid_argument("late bin does not fit in the slot");
  for (double t : normalization)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("normalization trims must lie in [0, 1]");
}

PlanError::PlanError(std::size_t index, const std::string& what)
    : std::runtime_error("symbol " + std::to_string(index) + ": " + what), index_(index) {}

DecoyStage plan_decoy_stage(double target, double v_pi) {
  DecoyStage stage;
  stage.target = target;
  if (target == 0.0) return stage;

  // Reachability and range checks.
  voltage_for_transmission(target, v_pi);

  const int top = branch_top_code(v_pi).value;
  auto transfer = [&](int code) { return intensity_transmission(code / 20.0, v_pi); };

  int coarse = top;
  for (int c = 0; c <= top; ++c) {
    if (transfer(c) >= target) {
      coarse = c;
      break;
    }
  }
  const double t_coarse = transfer(coarse);
  int fine = top;
  double best = std::abs(t_coarse * transfer(top) - target);
  for (int f = top - 1; f >= 0; --f) {
    const double err = std::abs(t_coarse * transfer(f) - target);
    if (err < best) {
      best = err;
      fine = f;
    }
  }
  stage.coarse = AmplitudeCode(coarse);
  stage.fine = AmplitudeCode(fine);
  stage.achieved = t_coarse * transfer(fine);
  return stage;
}

double decoy_transmission(const SlotPlan& slot, const ModulatorCalibration& cal) {
  const double v_pi = cal.v_pi_of(ChannelGroup::Decoy);
  double coarse = 0.0, fine = 0.0;
  for (const auto& f : slot.firings) {
    if (f.channel == channels::AD1()) coarse = intensity_transmission(amplitude_code_to_volts(f.amplitude), v_pi);
    if (f.channel == channels::AD3()) fine = intensity_transmission(amplitude_code_to_volts(f.amplitude), v_pi);
  }
  return coarse * fine;
}

SlotPlan plan_symbol(const QkdSymbol& symbol, const ModulatorCalibration& cal, std::size_t slot_index) {
  cal.validate();
  if (symbol.bit != 0 && symbol.bit != 1) throw std::invalid_argument("bit must be 0 or 1");

  const PulseTiming timing{static_cast<double>(slot_index) * cal.slot_period + cal.early_bin_start, cal.bin_width};
  const DelayCode early(0);
  const DelayCode late = cal.late_bin_delay();

  auto gate_code = [&](ChannelGroup g) { return voltage_for_transmission(1.0, cal.v_pi_of(g)).code; };

  SlotPlan slot;
  slot.index = slot_index;
  slot.symbol = symbol;
  auto fire = [&](ChannelId ch, AmplitudeCode amp, DelayCode delay) {
    slot.firings.push_back(Firing{ch, amp, delay, timing});
  };

  const auto chop = gate_code(ChannelGroup::Chopper);
  fire(channels::AC1(), chop, early);
  fire(channels::AC2(), chop, late);

  const double relative = cal.intensity_target(symbol.intensity) / cal.mu;
  const auto decoy = plan_decoy_stage(relative, cal.v_pi_of(ChannelGroup::Decoy));
  fire(channels::AD1(), decoy.coarse, early);
  fire(channels::AD2(), decoy.coarse, late);
  fire(channels::AD3(), decoy.fine, early);
  fire(channels::AD4(), decoy.fine, late);

  const double v_norm = cal.v_pi_of(ChannelGroup::Normalization);
  fire(channels::AU1(), voltage_for_transmission(cal.normalization[0], v_norm).code, early);
  fire(channels::AU2(), voltage_for_transmission(cal.normalization[1], v_norm).code, late);

  if (symbol.intensity == Intensity::Vacuum) return slot;

  const auto gate = gate_code(ChannelGroup::Time);
  if (symbol.basis == Basis::X) {
    const double v_phase = cal.v_pi_of(ChannelGroup::Phase);
    fire(channels::AP1(), code_for_phase(0.0, v_phase), early);
    fire(channels::AP2(), code_for_phase(symbol.bit * std::numbers::pi, v_phase), late);
    fire(channels::AT1(), gate, early);
    fire(channels::AT2(), gate, late);
  } else if (symbol.bit == 0) {
    fire(channels::AT1(), gate, early);
  } else {
    fire(channels::AT2(), gate, late);
  }
  return slot;
}

proto::ChannelBank slot_bank(const SlotPlan& slot) {
  auto bank = proto::fresh_bank();
  for (const auto& f : slot.firings) bank[f.channel.wire_index()] = ChannelSettings{f.channel, f.amplitude, f.delay, true};
  return bank;
}

PlannedSequence plan_sequence(std::span<const QkdSymbol> symbols, const ModulatorCalibration& cal) {
  PlannedSequence out;
  if (!symbols.empty()) out.commands.push_back({Opcode::LoadPattern, proto::device_wide, 0});

  proto::ChannelBank current{};
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    try {
      out.plan.slots.push_back(plan_symbol(symbols[k], cal, k));
    } catch (const std::exception& e) {
      throw PlanError(k, e.what());
    }
    const auto bank = slot_bank(out.plan.slots.back());
    for (const auto& s : bank) {
      const auto& prev = current[s.channel.wire_index()];
      const uint8_t wire = s.channel.wire_index();
      if (k == 0 || prev.amplitude != s.amplitude)
        out.commands.push_back({Opcode::SetAmplitude, wire, static_cast<uint16_t>(s.amplitude.value)});
      if (k == 0 || prev.delay != s.delay)
        out.commands.push_back({Opcode::SetDelay, wire, proto::delay_to_payload(s.delay)});
      if (k == 0 || prev.enabled != s.enabled)
        out.commands.push_back({Opcode::SetEnable, wire, static_cast<uint16_t>(s.enabled ? 1 : 0)});
    }
    current = bank;
    if (k + 1 > 0xFFFF) throw PlanError(k, "pattern longer than 65535 slots");
    out.commands.push_back({Opcode::LoadPattern, proto::device_wide, static_cast<uint16_t>(k + 1)});
  }
  out.commands.push_back({Opcode::Arm, proto::device_wide, 0});
  return out;
}

}
