#pragma once

#include <optional>

#include "pulsectl/bench/measure.hpp"
#include "pulsectl/proto/emulator.hpp"

namespace pulsectl::bench {

struct CaptureResult {
  ChannelId channel;
  ChannelSettings settings;
  Waveform waveform;
  std::optional<double> trigger_time;
  MeasurementReport report;
};

// Virtual scope on one output. Renders the channel from a single state
// snapshot, plus the same settings at delay code 0 as the delay reference.
CaptureResult capture_channel(const proto::DeviceEmulator& device, ChannelId channel, const CaptureConfig& config,
                              std::optional<PulseTiming> timing = std::nullopt);

}
