#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsectl/signal/waveform.hpp"

namespace pulsectl {

class WaveformFormatError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// CSV form:
//   # pulsectl-waveform v1
//   # sample_rate=<S/s>
//   # t0=<s>
//   # count=<n>
//   # load_ohms=<ohms>        (only when annotated)
//   time_s,volts
//   <t>,<v>                   (n rows, shortest round-trip decimal)
//
// Binary form (all little-endian):
//   "PCWF" | u16 version=1 | u16 flags (bit0: load present) | f64 sample_rate |
//   f64 t0 | u64 count | [f64 load_ohms] | count x f64 samples
enum class WaveformEncoding { Csv, Binary };

void write_waveform_csv(std::ostream& out, const Waveform& w);
Waveform read_waveform_csv(std::istream& in);

std::vector<uint8_t> encode_waveform_binary(const Waveform& w);
Waveform decode_waveform_binary(const std::vector<uint8_t>& bytes);

void save_waveform(const std::filesystem::path& path, const Waveform& w, WaveformEncoding encoding);
// Detects the encoding from the leading bytes.
Waveform load_waveform(const std::filesystem::path& path);

// Encoding implied by a file extension: ".bin"/".pcwf" -> Binary, anything else -> Csv.
WaveformEncoding encoding_for_path(const std::filesystem::path& path);

}
