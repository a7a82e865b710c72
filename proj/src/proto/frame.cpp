#include "pulsectl/proto/frame.hpp"

#include <algorithm>
#include <string>

#include "pulsectl/proto/crc8.hpp"

namespace pulsectl::proto {

namespace {

std::optional<Opcode> opcode_from_byte(uint8_t b) {
  if (b >= 0x01 && b <= 0x08) return static_cast<Opcode>(b);
  return std::nullopt;
}

FrameBytes assemble(uint8_t sof, uint8_t b1, uint8_t b2, uint16_t word) {
  FrameBytes f{sof, b1, b2, static_cast<uint8_t>(word >> 8), static_cast<uint8_t>(word & 0xFF), 0};
  f[5] = crc8(std::span<const uint8_t>(f).subspan(1, 4));
  return f;
}

// SOF, length and CRC checks shared by commands and replies.
std::optional<DecodeFailure> check_envelope(std::span<const uint8_t> bytes, uint8_t sof) {
  if (bytes.empty()) return DecodeFailure{FrameError::Truncated, 0};
  if (bytes[0] != sof) return DecodeFailure{FrameError::BadSof, 0};
  if (bytes.size() < frame_size) return DecodeFailure{FrameError::Truncated, bytes.size()};
  if (crc8(bytes.subspan(1, 4)) != bytes[5]) return DecodeFailure{FrameError::BadCrc, 5};
  return std::nullopt;
}

}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::SetAmplitude: return "SetAmplitude";
    case Opcode::SetDelay: return "SetDelay";
    case Opcode::GetAmplitude: return "GetAmplitude";
    case Opcode::GetDelay: return "GetDelay";
    case Opcode::SetEnable: return "SetEnable";
    case Opcode::GetStatus: return "GetStatus";
    case Opcode::LoadPattern: return "LoadPattern";
    case Opcode::Arm: return "Arm";
  }
  return "Unknown";
}

std::optional<Opcode> parse_opcode(std::string_view name) {
  for (auto op : all_opcodes)
    if (to_string(op) == name) return op;
  return std::nullopt;
}

bool is_channel_scoped(Opcode op) {
  switch (op) {
    case Opcode::SetAmplitude:
    case Opcode::SetDelay:
    case Opcode::GetAmplitude:
    case Opcode::GetDelay:
    case Opcode::SetEnable:
      return true;
    default:
      return false;
  }
}

uint16_t max_payload(Opcode op) {
  switch (op) {
    case Opcode::SetAmplitude: return 120;
    case Opcode::SetDelay: return 300;
    case Opcode::SetEnable: return 1;
    case Opcode::LoadPattern: return 0xFFFF;
    default: return 0;
  }
}

std::string_view to_string(FrameError e) {
  switch (e) {
    case FrameError::BadSof: return "BadSof";
    case FrameError::Truncated: return "Truncated";
    case FrameError::BadCrc: return "BadCrc";
    case FrameError::BadOpcode: return "BadOpcode";
    case FrameError::RangeViolation: return "RangeViolation";
  }
  return "Unknown";
}

std::optional<FrameError> check_command(const Command& c) {
  if (!opcode_from_byte(static_cast<uint8_t>(c.opcode))) return FrameError::BadOpcode;
  if (is_channel_scoped(c.opcode) ? c.channel >= 12 : c.channel != device_wide)
    return FrameError::RangeViolation;
  if (c.payload > max_payload(c.opcode)) return FrameError::RangeViolation;
  return std::nullopt;
}

FrameBytes encode_frame(const Command& c) {
  if (auto err = check_command(c))
    throw EncodeError(*err, "cannot encode " + std::string(to_string(c.opcode)) + " ch " +
                                std::to_string(c.channel) + " payload " + std::to_string(c.payload) + ": " +
                                std::string(to_string(*err)));
  return assemble(command_sof, static_cast<uint8_t>(c.opcode), c.channel, c.payload);
}

std::variant<Command, DecodeFailure> decode_frame(std::span<const uint8_t> bytes) {
  if (auto failure = check_envelope(bytes, command_sof)) return *failure;
  const auto op = opcode_from_byte(bytes[1]);
  if (!op) return DecodeFailure{FrameError::BadOpcode, 1};
  Command c{*op, bytes[2], static_cast<uint16_t>((bytes[3] << 8) | bytes[4])};
  if (check_command(c)) {
    const bool channel_ok = is_channel_scoped(c.opcode) ? c.channel < 12 : c.channel == device_wide;
    return DecodeFailure{FrameError::RangeViolation, channel_ok ? std::size_t{3} : std::size_t{2}};
  }
  return c;
}

ReplyStatus nak_for(FrameError e) { return static_cast<ReplyStatus>(static_cast<uint8_t>(e)); }

std::string_view to_string(ReplyStatus s) {
  if (s == ReplyStatus::Ack) return "ACK";
  return to_string(static_cast<FrameError>(static_cast<uint8_t>(s)));
}

FrameBytes encode_reply(const Reply& r) {
  return assemble(reply_sof, static_cast<uint8_t>(r.status), r.opcode, r.value);
}

std::variant<Reply, DecodeFailure> decode_reply(std::span<const uint8_t> bytes) {
  if (auto failure = check_envelope(bytes, reply_sof)) return *failure;
  if (bytes[1] > 0x05) return DecodeFailure{FrameError::RangeViolation, 1};
  return Reply{static_cast<ReplyStatus>(bytes[1]), bytes[2], static_cast<uint16_t>((bytes[3] << 8) | bytes[4])};
}

void FrameScanner::feed(std::span<const uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

std::optional<FrameScanner::Event> FrameScanner::next() {
  if (buffer_.empty()) return std::nullopt;
  if (buffer_.front() != command_sof) {
    const std::size_t start = consumed_;
    while (!buffer_.empty() && buffer_.front() != command_sof) {
      buffer_.pop_front();
      ++consumed_;
    }
    return Event{DecodeFailure{FrameError::BadSof, start}, std::nullopt};
  }
  if (buffer_.size() < frame_size) return std::nullopt;

  FrameBytes window;
  std::copy_n(buffer_.begin(), frame_size, window.begin());
  const std::size_t start = consumed_;
  auto result = decode_frame(window);
  if (auto* failure = std::get_if<DecodeFailure>(&result); failure && failure->error == FrameError::BadCrc) {
    // The SOF may have been noise; resume right after it.
    buffer_.pop_front();
    ++consumed_;
    return Event{DecodeFailure{FrameError::BadCrc, start}, window};
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + frame_size);
  consumed_ += frame_size;
  if (auto* failure = std::get_if<DecodeFailure>(&result))
    return Event{DecodeFailure{failure->error, start}, window};
  return Event{std::get<Command>(result), window};
}

std::optional<FrameScanner::Event> FrameScanner::finish() {
  if (auto e = next()) return e;
  if (buffer_.empty()) return std::nullopt;
  const std::size_t start = consumed_;
  consumed_ += buffer_.size();
  buffer_.clear();
  return Event{DecodeFailure{FrameError::Truncated, start}, std::nullopt};
}

}
