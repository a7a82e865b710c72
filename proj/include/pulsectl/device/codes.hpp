#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsectl/device/channel.hpp"

namespace pulsectl {

class RangeError: public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

// Static description of the module. Amplitudes live on a 0.05 V grid and delays
// on a 100 ps grid; the integer codes are the source of truth.
struct DeviceLimits {
  static constexpr int amplitude_code_max = 120;
  static constexpr int delay_code_min = -150;
  static constexpr int delay_code_max = 150;
  static constexpr int millivolts_per_step = 50;
  static constexpr int picoseconds_per_step = 100;

  double volts_per_step = 0.05;
  double max_volts = 6.0;
  double delay_step = 100e-12;
  double delay_span = 15e-9;
  double nominal_rise_time = 1.0e-9;  // 10-90 %
  double rail_peak_volts = 7.0;
  double load_ohms = 50.0;
  double max_vpp_into_load = 10.0;
};

inline constexpr DeviceLimits default_limits{};

struct AmplitudeCode {
  int value = 0;

  constexpr AmplitudeCode() = default;
  explicit constexpr AmplitudeCode(int v): value(v) {}

  constexpr bool valid() const { return value >= 0 && value <= DeviceLimits::amplitude_code_max; }
  friend constexpr bool operator==(AmplitudeCode, AmplitudeCode) = default;
  friend constexpr auto operator<=>(AmplitudeCode, AmplitudeCode) = default;
};

struct DelayCode {
  int value = 0;

  constexpr DelayCode() = default;
  explicit constexpr DelayCode(int v): value(v) {}

  constexpr bool valid() const {
    return value >= DeviceLimits::delay_code_min && value <= DeviceLimits::delay_code_max;
  }
  friend constexpr bool operator==(DelayCode, DelayCode) = default;
  friend constexpr auto operator<=>(DelayCode, DelayCode) = default;
};

struct ChannelSettings {
  ChannelId channel;
  AmplitudeCode amplitude;
  DelayCode delay;
  bool enabled = false;

  friend bool operator==(const ChannelSettings&, const ChannelSettings&) = default;
};

// Exact integer views of the grids.
int amplitude_code_to_millivolts(AmplitudeCode code);
int delay_code_to_picoseconds(DelayCode code);

// code / 20, i.e. the double nearest to the decimal grid value.
double amplitude_code_to_volts(AmplitudeCode code);
// Nearest grid code; exact midpoints round up to the larger code.
AmplitudeCode volts_to_amplitude_code(double volts);

double delay_code_to_seconds(DelayCode code);

enum class SettingsField { Amplitude, Delay };

struct Violation {
  SettingsField field;
  std::string message;
};

// Empty iff the settings are valid. Never throws.
std::vector<Violation> validate_settings(const ChannelSettings& settings);

}
