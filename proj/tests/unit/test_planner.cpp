#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "pulsectl/planner/modulator.hpp"
#include "pulsectl/planner/plan.hpp"
#include "pulsectl/planner/plan_io.hpp"
#include "pulsectl/proto/device_state.hpp"

using namespace pulsectl;
using namespace pulsectl::planner;

namespace {

const Firing* find(const SlotPlan& slot, ChannelId ch) {
  for (const auto& f : slot.firings)
    if (f.channel == ch) return &f;
  return nullptr;
}

double sin2(double v, double v_pi) {
  const double s = std::sin(std::numbers::pi * v / (2 * v_pi));
  return s * s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<QkdSymbol> all_symbols() {
  std::vector<QkdSymbol> out;
  for (auto i : {Intensity::Signal, Intensity::Decoy, Intensity::Vacuum})
    for (auto b : {Basis::Z, Basis::X})
      for (int bit : {0, 1}) out.push_back({i, b, bit});
  return out;
}

}

TEST_CASE("modulator transfer functions") {
  CHECK(intensity_transmission(0.0, 5.0) == 0.0);
  CHECK(intensity_transmission(5.0, 5.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(intensity_transmission(2.5, 5.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(phase_shift(0.0, 5.0) == 0.0);
  CHECK(phase_shift(5.0, 5.0) == doctest::Approx(std::numbers::pi));
  CHECK(phase_shift(2.5, 5.0) == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS(intensity_transmission(5.5, 5.0));
  CHECK_THROWS(intensity_transmission(1.0, 0.0));
}

TEST_CASE("voltage_for_transmission") {
  CHECK(voltage_for_transmission(0.0, 5.0).code.value == 0);
  auto full = voltage_for_transmission(1.0, 5.0);
  CHECK(full.volts == doctest::Approx(5.0));
  CHECK(full.code.value == 100);
  auto half = voltage_for_transmission(0.5, 5.0);
  CHECK(half.code.value == 50);
  CHECK(half.achieved == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(half.achieved == doctest::Approx(sin2(2.5, 5.0)).epsilon(1e-15));

  CHECK_THROWS_AS(voltage_for_transmission(1.0, 6.5), UnreachableSetpoint);
  CHECK_THROWS(voltage_for_transmission(1.2, 5.0));
  // v_pi off the grid: never past the branch top.
  const auto top = voltage_for_transmission(1.0, 4.98);
  CHECK(top.code.value == 99);
  CHECK(amplitude_code_to_volts(top.code) <= 4.98);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(0.0, 1.0), vp(0.5, 6.0);
  for (int i = 0; i < 2000; ++i) {
    const double v_pi = vp(rng), target = t(rng);
    const auto sp = voltage_for_transmission(target, v_pi);
    CHECK(sp.achieved == doctest::Approx(sin2(amplitude_code_to_volts(sp.code), v_pi)).epsilon(1e-12));
    CHECK(std::abs(sp.residual()) <= std::numbers::pi / (2 * v_pi) * 0.05 + 1e-12);
  }
}

TEST_CASE("code_for_phase") {
  CHECK(code_for_phase(0.0, 5.0).value == 0);
  CHECK(code_for_phase(std::numbers::pi, 5.0).value == 100);
  CHECK(code_for_phase(std::numbers::pi / 2, 5.0).value == 50);
  CHECK_THROWS_AS(code_for_phase(std::numbers::pi, 6.5), UnreachableSetpoint);
}

TEST_CASE("default calibration") {
  const ModulatorCalibration cal;
  for (double v : cal.v_pi) CHECK(v == 5.0);
  CHECK(cal.mu == 0.5);
  CHECK(cal.nu == 0.1);
  CHECK(cal.slot_period == 10e-9);
  CHECK(cal.bin_separation == 3e-9);
  CHECK(cal.late_bin_delay().value == 30);
  CHECK_NOTHROW(cal.validate());

  ModulatorCalibration bad = cal;
  bad.nu = 0.6;
  CHECK_THROWS(bad.validate());
  bad = cal;
  bad.bin_separation = 10e-9;
  CHECK_THROWS(bad.validate());
  bad = cal;
  bad.bin_separation = 3.05e-9;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("plan_symbol mapping") {
  const ModulatorCalibration cal;

  const auto z0 = plan_symbol({Intensity::Signal, Basis::Z, 0}, cal);
  REQUIRE(find(z0, channels::AT1()));
  CHECK_FALSE(find(z0, channels::AT2()));
  CHECK(find(z0, channels::AT1())->timing.start == doctest::Approx(cal.early_bin_start));
  CHECK(find(z0, channels::AT1())->delay.value == 0);
  CHECK(find(z0, channels::AD1())->amplitude == voltage_for_transmission(1.0, 5.0).code);
  CHECK(find(z0, channels::AD3())->amplitude == voltage_for_transmission(1.0, 5.0).code);
  CHECK_FALSE(find(z0, channels::AP1()));
  CHECK_FALSE(find(z0, channels::AP2()));

  const auto z1 = plan_symbol({Intensity::Signal, Basis::Z, 1}, cal);
  CHECK_FALSE(find(z1, channels::AT1()));
  REQUIRE(find(z1, channels::AT2()));
  CHECK(find(z1, channels::AT2())->delay == cal.late_bin_delay());

  const auto x1 = plan_symbol({Intensity::Signal, Basis::X, 1}, cal);
  REQUIRE(find(x1, channels::AP2()));
  CHECK(find(x1, channels::AP2())->amplitude.value == 100);
  CHECK(find(x1, channels::AP1())->amplitude.value == 0);
  CHECK(find(x1, channels::AT1()));
  CHECK(find(x1, channels::AT2()));
  const auto x0 = plan_symbol({Intensity::Signal, Basis::X, 0}, cal);
  CHECK(find(x0, channels::AP2())->amplitude.value == 0);

  for (auto basis : {Basis::Z, Basis::X})
    for (int bit : {0, 1}) {
      const auto vac = plan_symbol({Intensity::Vacuum, basis, bit}, cal);
      CHECK(decoy_transmission(vac, cal) == 0.0);
      CHECK(find(vac, channels::AD1())->amplitude.value == 0);
      for (auto ch : {channels::AP1(), channels::AP2(), channels::AT1(), channels::AT2()}) CHECK_FALSE(find(vac, ch));
      CHECK(find(vac, channels::AC1()));
      CHECK(find(vac, channels::AC2()));
    }

  for (const auto& s : all_symbols()) {
    const auto slot = plan_symbol(s, cal);
    for (const auto& f : slot.firings) CHECK(f.amplitude.valid());
    if (s.basis == Basis::Z)
      for (auto ch : {channels::AP1(), channels::AP2()})
        if (auto* f = find(slot, ch)) CHECK(f->amplitude.value == 0);
    if (s.basis == Basis::X && s.intensity != Intensity::Vacuum) {
      CHECK(find(slot, channels::AT1()));
      CHECK(find(slot, channels::AT2()));
    }
  }
}

TEST_CASE("decoy ordering and quantisation bound") {
  const ModulatorCalibration cal;
  auto t_of = [&](Intensity i, const ModulatorCalibration& c) {
    return decoy_transmission(plan_symbol({i, Basis::Z, 0}, c), c);
  };
  const double bound = std::numbers::pi / (2 * 5.0) * 0.05;
  const double ts = t_of(Intensity::Signal, cal), td = t_of(Intensity::Decoy, cal), tv = t_of(Intensity::Vacuum, cal);
  CHECK(tv == 0.0);
  CHECK(tv < td);
  CHECK(td < ts);
  CHECK(std::abs(ts - 1.0) <= bound);
  CHECK(std::abs(td - 0.2) <= bound);
  // The fine stage does much better than a single 0.05 V step.
  CHECK(std::abs(td - 0.2) <= 1e-3);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> vp(1.0, 6.0), unit(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    ModulatorCalibration c;
    c.v_pi.fill(vp(rng));
    c.mu = 0.05 + unit(rng);
    c.nu = c.mu * unit(rng) * 0.95;
    const double b = std::numbers::pi / (2 * c.v_pi[0]) * 0.05;
    const double s = t_of(Intensity::Signal, c), d = t_of(Intensity::Decoy, c);
    CHECK(t_of(Intensity::Vacuum, c) == 0.0);
    CHECK(d < s);
    CHECK(std::abs(s - 1.0) <= b);
    CHECK(std::abs(d - c.nu / c.mu) <= b);
  }
}

TEST_CASE("unreachable calibrations are flagged, not clipped") {
  ModulatorCalibration c;
  c.v_pi[static_cast<std::size_t>(ChannelGroup::Decoy)] = 6.5;
  const std::vector<QkdSymbol> one{{Intensity::Signal, Basis::Z, 0}};
  CHECK_THROWS_AS(plan_sequence(one, c), PlanError);

  ModulatorCalibration p;
  p.v_pi[static_cast<std::size_t>(ChannelGroup::Phase)] = 7.0;
  const std::vector<QkdSymbol> two{{Intensity::Signal, Basis::Z, 0}, {Intensity::Signal, Basis::X, 1}};
  try {
    plan_sequence(two, p);
    FAIL("expected a plan error");
  } catch (const PlanError& e) {
    CHECK(e.symbol_index() == 1);
  }
}

TEST_CASE("plan_sequence") {
  const ModulatorCalibration cal;
  const auto empty = plan_sequence({}, cal);
  CHECK(empty.plan.slots.empty());
  REQUIRE(empty.commands.size() == 1);
  CHECK(empty.commands[0].opcode == proto::Opcode::Arm);

  const std::vector<QkdSymbol> one{{Intensity::Signal, Basis::Z, 0}};
  const auto single = plan_sequence(one, cal);
  REQUIRE(single.plan.slots.size() == 1);
  CHECK(single.plan.slots[0] == plan_symbol(one[0], cal, 0));
  CHECK(single.commands.front() == proto::Command{proto::Opcode::LoadPattern, proto::device_wide, 0});
  CHECK(single.commands.back().opcode == proto::Opcode::Arm);
  // Full first slot: 12 channels x 3 settings, plus LoadPattern(0), LoadPattern(1) and Arm.
  CHECK(single.commands.size() == 36 + 3);

  const std::vector<QkdSymbol> same(5, {Intensity::Decoy, Basis::X, 1});
  const auto rep = plan_sequence(same, cal);
  REQUIRE(rep.plan.slots.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& slot = rep.plan.slots[k];
    REQUIRE(slot.firings.size() == rep.plan.slots[0].firings.size());
    for (std::size_t i = 0; i < slot.firings.size(); ++i) {
      const auto& a = rep.plan.slots[0].firings[i];
      const auto& b = slot.firings[i];
      CHECK(a.channel == b.channel);
      CHECK(a.amplitude == b.amplitude);
      CHECK(a.delay == b.delay);
      CHECK(b.timing.start == doctest::Approx(a.timing.start + k * cal.slot_period));
    }
  }
  // Identical slots need no Set* frames after the first.
  CHECK(rep.commands.size() == 36 + 5 + 2);
}

TEST_CASE("replaying the command stream reconstructs the plan") {
  const ModulatorCalibration cal;
  std::mt19937 rng(23);
  const auto symbols = all_symbols();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<QkdSymbol> seq(1 + rng() % 30);
    for (auto& s : seq) s = symbols[rng() % symbols.size()];
    const auto planned = plan_sequence(seq, cal);
    proto::DeviceState state;
    for (const auto& c : planned.commands) {
      auto [next, reply] = proto::apply_command(state, c);
      REQUIRE(reply.ok());
      state = next;
    }
    CHECK(state.armed);
    REQUIRE(state.pattern);
    REQUIRE(state.pattern->size() == seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) CHECK((*state.pattern)[k] == slot_bank(planned.plan.slots[k]));
  }
}

TEST_CASE("symbol and plan text formats") {
  CHECK(parse_symbol("signal,Z,0") == QkdSymbol{Intensity::Signal, Basis::Z, 0});
  CHECK(parse_symbol(" Decoy , x , 1 ") == QkdSymbol{Intensity::Decoy, Basis::X, 1});
  CHECK(format_symbol({Intensity::Vacuum, Basis::X, 1}) == "vacuum,X,1");
  CHECK_THROWS(parse_symbol("signal,Y,0"));
  CHECK_THROWS(parse_symbol("signal,Z,2"));

  try {
    parse_symbols("# header\nsignal,Z,0\n\ndecoy,Q,1\n");
    FAIL("expected a format error");
  } catch (const PlanFormatError& e) {
    CHECK(e.line() == 4);
  }

  const ModulatorCalibration cal;
  const auto symbols = parse_symbols(slurp(PULSECTL_TEST_DATA "/symbols.txt"));
  REQUIRE(symbols.size() == 12);
  const auto plan = plan_sequence(symbols, cal).plan;
  const auto text = format_plan(plan);
  CHECK(parse_plan(text, cal) == plan);
  CHECK(text == slurp(PULSECTL_TEST_DATA "/symbols.plan.golden"));
  CHECK(text.substr(0, text.find('\n')) ==
        "0 | signal,Z,0 | AC1:100:0,AC2:100:30,AD1:100:0,AD2:100:30,AD3:100:0,AD4:100:30,AU1:100:0,AU2:100:30,AT1:100:0");

  CHECK_THROWS_AS(parse_plan("0 | signal,Z,0 | AC1:100\n", cal), PlanFormatError);
}
