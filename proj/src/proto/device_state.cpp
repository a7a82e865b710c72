#include "pulsectl/proto/device_state.hpp"

namespace pulsectl::proto {

ChannelBank fresh_bank() {
  ChannelBank bank;
  for (auto id : ChannelId::all()) bank[id.wire_index()] = ChannelSettings{id, AmplitudeCode(0), DelayCode(0), false};
  return bank;
}

uint16_t DeviceState::status_word() const {
  uint16_t word = 0;
  for (const auto& s : channels)
    if (s.enabled) word |= static_cast<uint16_t>(1u << s.channel.wire_index());
  if (armed) word |= status_armed;
  if (pattern) word |= status_pattern;
  return word;
}

uint16_t delay_to_payload(DelayCode code) { return static_cast<uint16_t>(code.value + delay_payload_offset); }

DelayCode payload_to_delay(uint16_t payload) { return DelayCode(static_cast<int>(payload) - delay_payload_offset); }

std::pair<DeviceState, Reply> apply_command(const DeviceState& state, const Command& c) {
  const auto op_byte = static_cast<uint8_t>(c.opcode);
  if (auto err = check_command(c)) return {state, Reply{nak_for(*err), op_byte, c.payload}};

  DeviceState next = state;
  Reply ack{ReplyStatus::Ack, op_byte, c.payload};
  auto& channel = next.channels[is_channel_scoped(c.opcode) ? c.channel : 0];

  switch (c.opcode) {
    case Opcode::SetAmplitude:
      channel.amplitude = AmplitudeCode(c.payload);
      break;
    case Opcode::SetDelay:
      channel.delay = payload_to_delay(c.payload);
      break;
    case Opcode::SetEnable:
      channel.enabled = c.payload != 0;
      break;
    case Opcode::GetAmplitude:
      ack.value = static_cast<uint16_t>(channel.amplitude.value);
      break;
    case Opcode::GetDelay:
      ack.value = delay_to_payload(channel.delay);
      break;
    case Opcode::GetStatus:
      ack.value = state.status_word();
      break;
    case Opcode::LoadPattern:
      if (c.payload == 0) {
        next.pattern.emplace();
      } else {
        if (!next.pattern || next.pattern->size() + 1 != c.payload)
          return {state, Reply{ReplyStatus::NakRangeViolation, op_byte, c.payload}};
        next.pattern->push_back(next.channels);
      }
      break;
    case Opcode::Arm:
      next.armed = !next.armed;
      ack.value = next.armed ? 1 : 0;
      break;
  }
  return {std::move(next), ack};
}

}
