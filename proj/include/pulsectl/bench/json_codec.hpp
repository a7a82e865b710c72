#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pulsectl/bench/capture.hpp"
#include "pulsectl/proto/device_state.hpp"
#include "pulsectl/proto/frame.hpp"

namespace pulsectl::bench {

using nlohmann::json;

// Malformed or illegal request body; code is a stable machine-readable tag.
class RequestError: public std::runtime_error {
  public:
    RequestError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

json to_json(const ChannelSettings& s);
json to_json(const proto::DeviceState& state);
json to_json(const Waveform& w);
json to_json(const Measured& m);
json to_json(const MeasurementReport& r);
json to_json(const CaptureResult& c);

// {"opcode": "SetDelay", "channel": "AC1" | 0..11, "value": -10}. `value` is the
// semantic value (signed delay code, 0/1 or bool for enable); the wire offset is
// applied here. Device-wide opcodes take no channel.
proto::Command command_from_json(const json& body);
// Reply rendered with the semantic value of the echoed opcode.
json reply_to_json(const proto::Command& c, const proto::Reply& r);

struct CaptureRequest {
  ChannelId channel;
  CaptureConfig config;
  std::optional<PulseTiming> timing;
};
// {"channel": ..., "sample_rate"?, "window"?, "trigger_level"?, "trigger_edge"?, "start"?, "width"?}
CaptureRequest capture_request_from_json(const json& body);

ChannelId channel_from_json(const json& value);

}
