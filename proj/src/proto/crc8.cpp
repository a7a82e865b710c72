#include "pulsectl/proto/crc8.hpp"

namespace pulsectl::proto {

uint8_t crc8(std::span<const uint8_t> bytes) {
  uint8_t crc = 0x00;
  for (uint8_t b : bytes) {
    crc ^= b;
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x80) ? static_cast<uint8_t>((crc << 1) ^ 0x07) : static_cast<uint8_t>(crc << 1);
  }
  return crc;
}

}
