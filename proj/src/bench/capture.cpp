#include "pulsectl/bench/capture.hpp"

namespace pulsectl::bench {

CaptureResult capture_channel(const proto::DeviceEmulator& device, ChannelId channel, const CaptureConfig& config,
                              std::optional<PulseTiming> timing) {
  const auto state = device.snapshot();
  const auto chain = device.chain();
  const auto pulse = timing.value_or(device.timing());
  const auto& settings = state.channels[channel.wire_index()];

  auto trace = synthesize(settings, pulse, chain, config);
  auto undelayed = settings;
  undelayed.delay = DelayCode(0);
  const auto reference = synthesize(undelayed, pulse, chain, config);

  auto report = measure(trace, &reference, chain);
  auto trigger = find_trigger(trace, config.trigger_level, config.trigger_edge);
  return CaptureResult{channel, settings, std::move(trace), trigger, std::move(report)};
}

}
