#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pulsectl/device/codes.hpp"
#include "pulsectl/proto/frame.hpp"

namespace pulsectl::proto {

using ChannelBank = std::array<ChannelSettings, channel_count>;

ChannelBank fresh_bank();

// GetStatus reply layout.
inline constexpr uint16_t status_enabled_mask = 0x0FFF;  // bit n: channel n enabled
inline constexpr uint16_t status_armed = 1u << 12;
inline constexpr uint16_t status_pattern = 1u << 13;

struct DeviceState {
  ChannelBank channels = fresh_bank();
  bool armed = false;
  // Recorded pattern: one bank snapshot per slot. LoadPattern(0) starts an
  // empty pattern; LoadPattern(n) commits the live bank as slot n-1 and is only
  // accepted when n equals the current slot count + 1.
  std::optional<std::vector<ChannelBank>> pattern;
  // Maintained by the emulator; command application never touches it.
  uint64_t uptime_ms = 0;

  uint16_t status_word() const;

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

// Pure transition. Set* update one field of one channel and ACK with the
// payload echoed; Get* leave the state alone and reply the current wire value;
// illegal commands NAK with the state unchanged.
std::pair<DeviceState, Reply> apply_command(const DeviceState& state, const Command& c);

// Payload encoding of a delay code and back.
uint16_t delay_to_payload(DelayCode code);
DelayCode payload_to_delay(uint16_t payload);

}
