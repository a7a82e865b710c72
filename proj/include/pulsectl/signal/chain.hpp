#pragma once

#include <cstdint>

#include "pulsectl/device/codes.hpp"
#include "pulsectl/signal/waveform.hpp"

namespace pulsectl {

// Leading edge of the ideal logic pulse relative to the slot/trigger, before the
// programmable delay is applied.
struct PulseTiming {
  double start = 40e-9;
  double width = 10e-9;

  friend bool operator==(const PulseTiming&, const PulseTiming&) = default;
};

enum class TriggerEdge { Rising, Falling };

struct CaptureConfig {
  double sample_rate = 40e9;
  double window = 100e-9;
  double trigger_level = 0.5;
  TriggerEdge trigger_edge = TriggerEdge::Rising;
};

// Single-pole time constant giving a 1 ns 10-90 % edge (tau * ln 9 = 1 ns).
double default_edge_tau();

struct ChainModel {
  double tau = default_edge_tau();
  double rail_peak = default_limits.rail_peak_volts;
  double load_ohms = default_limits.load_ohms;
  int polarity = +1;
  // Amplifier capability ceiling into the load; checked by the bench, never enforced here.
  double max_vpp_into_load = default_limits.max_vpp_into_load;
  // Additive Gaussian noise after the output stage. Off by default.
  double noise_sigma = 0.0;
  uint64_t noise_seed = 1;
};

// Rectangular pulse at the commanded amplitude on [start, start + width); all
// zero when the channel is disabled. The delay is not applied here, but the
// delayed pulse must still fit in [0, duration).
Waveform ideal_pulse(const ChannelSettings& settings, const PulseTiming& timing, double sample_rate,
                     double duration);

// Shift right by `delay` seconds. Whole samples move directly; the sub-sample
// residue is linearly interpolated. Samples leaving the window are dropped and
// vacated samples are 0.
Waveform apply_delay(const Waveform& w, double delay);

// Exact discretisation of a first-order low-pass with the input held between
// samples. The first output sample equals the first input (settled history).
Waveform apply_edge_filter(const Waveform& w, double tau);

// Hard clamp to [0, rail_peak] (mirrored for negative polarity) and annotate the load.
Waveform apply_output_stage(const Waveform& w, const ChainModel& chain);

// ideal_pulse -> apply_delay -> apply_edge_filter -> apply_output_stage [-> noise].
// Deterministic: equal inputs give bit-identical traces.
Waveform synthesize(const ChannelSettings& settings, const PulseTiming& timing, const ChainModel& chain,
                    const CaptureConfig& capture);

}
