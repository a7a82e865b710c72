#pragma once

#include <cstdint>
#include <span>

namespace pulsectl::proto {

// CRC-8/ATM: poly 0x07, init 0x00, unreflected, xor-out 0x00.
uint8_t crc8(std::span<const uint8_t> bytes);

}
