#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

namespace pulsectl::proto {

// Wire image of a command (6 bytes):
//   0xA5 | opcode | channel | payload_hi | payload_lo | crc8(opcode..payload_lo)
// and of a reply:
//   0x5A | status | echo opcode | value_hi | value_lo | crc8(status..value_lo)
inline constexpr uint8_t command_sof = 0xA5;
inline constexpr uint8_t reply_sof = 0x5A;
inline constexpr std::size_t frame_size = 6;
inline constexpr uint8_t device_wide = 0xFF;
// Delay codes travel as code + 150 so the payload stays unsigned.
inline constexpr int delay_payload_offset = 150;

enum class Opcode : uint8_t {
  SetAmplitude = 0x01,
  SetDelay = 0x02,
  GetAmplitude = 0x03,
  GetDelay = 0x04,
  SetEnable = 0x05,
  GetStatus = 0x06,
  LoadPattern = 0x07,
  Arm = 0x08,
};

inline constexpr std::array<Opcode, 8> all_opcodes{
    Opcode::SetAmplitude, Opcode::SetDelay, Opcode::GetAmplitude, Opcode::GetDelay,
    Opcode::SetEnable,    Opcode::GetStatus, Opcode::LoadPattern, Opcode::Arm};

std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view name);
bool is_channel_scoped(Opcode op);
// Largest legal payload for the opcode (all opcodes accept 0).
uint16_t max_payload(Opcode op);

struct Command {
  Opcode opcode = Opcode::GetStatus;
  uint8_t channel = device_wide;
  uint16_t payload = 0;

  friend bool operator==(const Command&, const Command&) = default;
};

// Also used as the NAK reason on the wire (values 0x01..0x05).
enum class FrameError : uint8_t {
  BadSof = 0x01,
  Truncated = 0x02,
  BadCrc = 0x03,
  BadOpcode = 0x04,
  RangeViolation = 0x05,
};

std::string_view to_string(FrameError e);

struct DecodeFailure {
  FrameError error;
  std::size_t offset = 0;

  friend bool operator==(const DecodeFailure&, const DecodeFailure&) = default;
};

using FrameBytes = std::array<uint8_t, frame_size>;

class EncodeError: public std::invalid_argument {
  public:
    EncodeError(FrameError reason, const std::string& what): std::invalid_argument(what), reason_(reason) {}
    FrameError reason() const { return reason_; }

  private:
    FrameError reason_;
};

// Opcode/channel/payload legality, independent of any framing.
std::optional<FrameError> check_command(const Command& c);

// Throws EncodeError before producing any bytes if the command is illegal.
FrameBytes encode_frame(const Command& c);

// Total over arbitrary input. Looks at the first frame_size bytes only; anything
// after them is left to the caller (see FrameScanner for streams).
std::variant<Command, DecodeFailure> decode_frame(std::span<const uint8_t> bytes);

enum class ReplyStatus : uint8_t {
  Ack = 0x00,
  NakBadSof = 0x01,
  NakTruncated = 0x02,
  NakBadCrc = 0x03,
  NakBadOpcode = 0x04,
  NakRangeViolation = 0x05,
};

ReplyStatus nak_for(FrameError e);
std::string_view to_string(ReplyStatus s);

struct Reply {
  ReplyStatus status = ReplyStatus::Ack;
  uint8_t opcode = 0;
  uint16_t value = 0;

  bool ok() const { return status == ReplyStatus::Ack; }
  friend bool operator==(const Reply&, const Reply&) = default;
};

FrameBytes encode_reply(const Reply& r);
std::variant<Reply, DecodeFailure> decode_reply(std::span<const uint8_t> bytes);

// Resynchronising reader for a byte stream of command frames. Garbage before a
// start-of-frame byte is reported once per run as BadSof; a frame that fails its
// CRC is reported and scanning resumes one byte after its SOF.
class FrameScanner {
  public:
    struct Event {
      std::variant<Command, DecodeFailure> item;
      // The six bytes examined, when a whole frame was available.
      std::optional<FrameBytes> raw;
      bool is_command() const { return std::holds_alternative<Command>(item); }
    };

    void feed(std::span<const uint8_t> bytes);
    // Next complete event, or nothing while a partial frame is pending.
    std::optional<Event> next();
    // End of stream: reports a pending partial frame as Truncated.
    std::optional<Event> finish();

    // Absolute stream offset of the next unread byte.
    std::size_t position() const { return consumed_; }

  private:
    std::deque<uint8_t> buffer_;
    std::size_t consumed_ = 0;
};

}
