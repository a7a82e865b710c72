#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pulsectl/device/codes.hpp"
#include "pulsectl/planner/modulator.hpp"
#include "pulsectl/proto/device_state.hpp"
#include "pulsectl/proto/frame.hpp"
#include "pulsectl/signal/chain.hpp"

namespace pulsectl::planner {

enum class Intensity { Signal, Decoy, Vacuum };
enum class Basis { Z, X };

struct QkdSymbol {
  Intensity intensity = Intensity::Signal;
  Basis basis = Basis::Z;
  int bit = 0;

  friend bool operator==(const QkdSymbol&, const QkdSymbol&) = default;
};

std::string_view to_string(Intensity i);
std::string_view to_string(Basis b);

struct ModulatorCalibration {
  // Half-wave voltage per channel group, indexed by ChannelGroup.
  std::array<double, 5> v_pi{5.0, 5.0, 5.0, 5.0, 5.0};
  double mu = 0.5;  // signal mean photon number
  double nu = 0.1;  // decoy mean photon number
  double slot_period = 10e-9;
  double bin_separation = 3e-9;
  double bin_width = 2e-9;
  // Early-bin leading edge relative to the slot start.
  double early_bin_start = 2e-9;
  // AU1/AU2 transmissions that equalise the two bins' signal-class output.
  std::array<double, 2> normalization{1.0, 1.0};

  double v_pi_of(ChannelGroup g) const { return v_pi[static_cast<std::size_t>(g)]; }
  // Mean photon number target of an intensity class.
  double intensity_target(Intensity i) const;
  // Delay code separating the late bin from the early bin.
  DelayCode late_bin_delay() const;
  // Throws std::invalid_argument on v_pi <= 0, mu <= nu, nu < 0, a late bin
  // that leaves the slot, or a bin separation off the delay grid.
  void validate() const;
};

struct Firing {
  ChannelId channel;
  AmplitudeCode amplitude;
  DelayCode delay;
  PulseTiming timing;  // absolute start of the undelayed pulse

  friend bool operator==(const Firing&, const Firing&) = default;
};

struct SlotPlan {
  std::size_t index = 0;
  QkdSymbol symbol;
  std::vector<Firing> firings;  // wire order; channels not listed are off

  friend bool operator==(const SlotPlan&, const SlotPlan&) = default;
};

struct PulsePlan {
  std::vector<SlotPlan> slots;

  friend bool operator==(const PulsePlan&, const PulsePlan&) = default;
};

struct PlannedSequence {
  PulsePlan plan;
  std::vector<proto::Command> commands;
};

class PlanError: public std::runtime_error {
  public:
    PlanError(std::size_t index, const std::string& what);
    std::size_t symbol_index() const { return index_; }

  private:
    std::size_t index_;
};

// Setpoints of the two cascaded decoy modulators of one bin (coarse AD1/AD2,
// fine AD3/AD4) for a normalised transmission target.
struct DecoyStage {
  AmplitudeCode coarse;
  AmplitudeCode fine;
  double target = 0.0;
  double achieved = 0.0;
};
DecoyStage plan_decoy_stage(double target, double v_pi);

// Transmission of the decoy stage of a slot (early bin), from its firings.
double decoy_transmission(const SlotPlan& slot, const ModulatorCalibration& cal);

// One slot. Chopper AC1/AC2 always carve both bins at full transmission; AD
// channels set the intensity class; AU channels apply the static trim. Z basis
// gates one bin (bit 0: AT1 early, bit 1: AT2 late); X basis gates both and AP2
// puts phase 0 or pi on the late bin against AP1's reference. Vacuum drives AD
// to code 0 and fires no AP/AT channel.
SlotPlan plan_symbol(const QkdSymbol& symbol, const ModulatorCalibration& cal, std::size_t slot_index = 0);

// Device view of a slot: fired channels enabled with their codes, the rest off.
proto::ChannelBank slot_bank(const SlotPlan& slot);

// Plans every slot and emits the command stream that loads it as a pattern:
// LoadPattern(0), per slot the Set* frames that change the bank followed by
// LoadPattern(k+1), then Arm. The first slot is written out in full.
PlannedSequence plan_sequence(std::span<const QkdSymbol> symbols, const ModulatorCalibration& cal);

}
