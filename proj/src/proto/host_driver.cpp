#include "pulsectl/proto/host_driver.hpp"

#include "pulsectl/proto/device_state.hpp"

namespace pulsectl::proto {

TransportTimeout::TransportTimeout(Opcode op, int attempts)
    : ProtocolError(std::string(to_string(op)) + ": no valid reply after " + std::to_string(attempts) + " attempts"),
      opcode_(op) {}

NakError::NakError(Opcode op, ReplyStatus status)
    : ProtocolError(std::string(to_string(op)) + ": device replied NAK(" + std::string(to_string(status)) + ")"),
      opcode_(op),
      status_(status) {}

PartialUpdateError::PartialUpdateError(Opcode failed_step, const std::string& cause)
    : ProtocolError("partial update, " + std::string(to_string(failed_step)) + " failed: " + cause),
      failed_step_(failed_step) {}

Reply HostDriver::transact(const Command& c) {
  const auto frame = encode_frame(c);
  std::lock_guard lock(mutex_);
  for (int attempt = 0; attempt < policy_.attempts; ++attempt) {
    transport_.discard_input();
    transport_.send(frame);
    const auto bytes = transport_.receive(frame_size, policy_.timeout);
    if (!bytes) continue;
    const auto decoded = decode_reply(*bytes);
    const auto* reply = std::get_if<Reply>(&decoded);
    if (!reply || reply->opcode != static_cast<uint8_t>(c.opcode)) continue;
    if (reply->status == ReplyStatus::NakBadCrc) continue;
    return *reply;
  }
  throw TransportTimeout(c.opcode, policy_.attempts);
}

Reply HostDriver::checked(const Command& c) {
  const auto reply = transact(c);
  if (!reply.ok()) throw NakError(c.opcode, reply.status);
  return reply;
}

void HostDriver::set_amplitude(ChannelId ch, AmplitudeCode code) {
  checked({Opcode::SetAmplitude, ch.wire_index(), static_cast<uint16_t>(code.value)});
}

void HostDriver::set_delay(ChannelId ch, DelayCode code) {
  checked({Opcode::SetDelay, ch.wire_index(), delay_to_payload(code)});
}

void HostDriver::set_enabled(ChannelId ch, bool enabled) {
  checked({Opcode::SetEnable, ch.wire_index(), static_cast<uint16_t>(enabled ? 1 : 0)});
}

AmplitudeCode HostDriver::get_amplitude(ChannelId ch) {
  return AmplitudeCode(checked({Opcode::GetAmplitude, ch.wire_index(), 0}).value);
}

DelayCode HostDriver::get_delay(ChannelId ch) {
  return payload_to_delay(checked({Opcode::GetDelay, ch.wire_index(), 0}).value);
}

uint16_t HostDriver::get_status() { return checked({Opcode::GetStatus, device_wide, 0}).value; }

bool HostDriver::arm() { return checked({Opcode::Arm, device_wide, 0}).value != 0; }

void HostDriver::load_pattern(uint16_t slot_count) { checked({Opcode::LoadPattern, device_wide, slot_count}); }

void HostDriver::set_channel(ChannelId ch, AmplitudeCode amplitude, DelayCode delay) {
  set_amplitude(ch, amplitude);
  try {
    set_delay(ch, delay);
  } catch (const ProtocolError& e) {
    throw PartialUpdateError(Opcode::SetDelay, e.what());
  }
}

}
