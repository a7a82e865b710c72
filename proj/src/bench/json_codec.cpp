#include "pulsectl/bench/json_codec.hpp"

namespace pulsectl::bench {

using proto::Command;
using proto::Opcode;

namespace {

// Capture requests beyond this many samples are refused.
constexpr double max_capture_samples = 4e6;

double number_field(const json& body, const char* key, double fallback) {
  if (!body.contains(key)) return fallback;
  const auto& v = body.at(key);
  if (!v.is_number()) throw RequestError("bad_field", std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}

json to_json(const ChannelSettings& s) {
  return {{"label", s.channel.label()},
          {"wire_index", s.channel.wire_index()},
          {"group", to_string(s.channel.group())},
          {"amplitude", s.amplitude.value},
          {"delay", s.delay.value},
          {"enabled", s.enabled}};
}

json to_json(const proto::DeviceState& state) {
  json channels = json::array();
  for (const auto& s : state.channels) channels.push_back(to_json(s));
  return {{"channels", channels},
          {"armed", state.armed},
          {"pattern_slots", state.pattern ? json(state.pattern->size()) : json(nullptr)},
          {"uptime_ms", state.uptime_ms}};
}

json to_json(const Waveform& w) {
  json out = {{"sample_rate", w.sample_rate()}, {"t0", w.t0()}, {"samples", w.samples()}};
  if (w.load_ohms()) out["load_ohms"] = *w.load_ohms();
  return out;
}

json to_json(const Measured& m) {
  if (m) return {{"value", m.value()}};
  return {{"value", nullptr}, {"reason", m.reason()}};
}

json to_json(const MeasurementReport& r) {
  return {{"vpp", r.vpp},
          {"peak", r.peak},
          {"rise_time_10_90", to_json(r.rise_time_10_90)},
          {"pulse_width_fwhm", to_json(r.pulse_width_fwhm)},
          {"delay_vs_reference", to_json(r.delay_vs_reference)},
          {"flags", r.flags}};
}

json to_json(const CaptureResult& c) {
  return {{"channel", c.channel.label()},
          {"settings", to_json(c.settings)},
          {"waveform", to_json(c.waveform)},
          {"trigger_time", c.trigger_time ? json(*c.trigger_time) : json(nullptr)},
          {"report", to_json(c.report)}};
}

ChannelId channel_from_json(const json& value) {
  if (value.is_string()) {
    if (auto id = ChannelId::from_label(value.get<std::string>())) return *id;
    throw RequestError("bad_channel", "unknown channel '" + value.get<std::string>() + "'");
  }
  if (value.is_number_integer()) {
    const auto n = value.get<long long>();
    if (n >= 0 && n < static_cast<long long>(channel_count)) return ChannelId::from_wire(static_cast<int>(n));
  }
  throw RequestError("bad_channel", "channel must be a label or a wire index 0..11");
}

Command command_from_json(const json& body) {
  if (!body.is_object()) throw RequestError("bad_request", "command body must be a JSON object");
  if (!body.contains("opcode") || !body["opcode"].is_string())
    throw RequestError("bad_opcode", "missing string field 'opcode'");
  const auto op = proto::parse_opcode(body["opcode"].get<std::string>());
  if (!op) throw RequestError("bad_opcode", "unknown opcode '" + body["opcode"].get<std::string>() + "'");

  Command c{*op, proto::device_wide, 0};
  if (proto::is_channel_scoped(*op)) {
    if (!body.contains("channel")) throw RequestError("bad_channel", "opcode needs a 'channel'");
    c.channel = channel_from_json(body["channel"]).wire_index();
  } else if (body.contains("channel") && !body["channel"].is_null()) {
    throw RequestError("bad_channel", "device-wide opcode takes no channel");
  }

  long long value = 0;
  if (body.contains("value") && !body["value"].is_null()) {
    const auto& v = body["value"];
    if (v.is_boolean()) value = v.get<bool>() ? 1 : 0;
    else if (v.is_number_integer()) value = v.get<long long>();
    else throw RequestError("bad_value", "'value' must be an integer or boolean");
  }
  if (*op == Opcode::SetDelay) value += proto::delay_payload_offset;
  if (value < 0 || value > 0xFFFF) throw RequestError("range_violation", "value outside the opcode's range");
  c.payload = static_cast<uint16_t>(value);

  if (auto err = proto::check_command(c))
    throw RequestError("range_violation", std::string(to_string(*op)) + ": " + std::string(to_string(*err)));
  return c;
}

json reply_to_json(const Command& c, const proto::Reply& r) {
  json out = {{"status", r.ok() ? "ACK" : "NAK"},
              {"opcode", to_string(c.opcode)},
              {"raw_value", r.value}};
  if (!r.ok()) out["reason"] = to_string(r.status);
  if (proto::is_channel_scoped(c.opcode)) out["channel"] = ChannelId::from_wire(c.channel).label();
  if (c.opcode == Opcode::SetDelay || c.opcode == Opcode::GetDelay)
    out["value"] = proto::payload_to_delay(r.value).value;
  else
    out["value"] = r.value;
  return out;
}

CaptureRequest capture_request_from_json(const json& body) {
  if (!body.is_object()) throw RequestError("bad_request", "capture body must be a JSON object");
  if (!body.contains("channel")) throw RequestError("bad_channel", "capture needs a 'channel'");
  CaptureRequest req{channel_from_json(body["channel"]), {}, std::nullopt};
  req.config.sample_rate = number_field(body, "sample_rate", req.config.sample_rate);
  req.config.window = number_field(body, "window", req.config.window);
  req.config.trigger_level = number_field(body, "trigger_level", req.config.trigger_level);
  if (body.contains("trigger_edge")) {
    const auto edge = body["trigger_edge"].is_string() ? body["trigger_edge"].get<std::string>() : "";
    if (edge == "rising") req.config.trigger_edge = TriggerEdge::Rising;
    else if (edge == "falling") req.config.trigger_edge = TriggerEdge::Falling;
    else throw RequestError("bad_field", "'trigger_edge' must be \"rising\" or \"falling\"");
  }
  if (!(req.config.sample_rate > 0.0) || !(req.config.window > 0.0))
    throw RequestError("bad_field", "sample_rate and window must be positive");
  if (req.config.sample_rate * req.config.window > max_capture_samples)
    throw RequestError("bad_field", "capture would exceed 4e6 samples");
  if (body.contains("start") || body.contains("width")) {
    PulseTiming t;
    t.start = number_field(body, "start", t.start);
    t.width = number_field(body, "width", t.width);
    req.timing = t;
  }
  return req;
}

}
