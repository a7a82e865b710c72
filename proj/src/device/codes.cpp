#include "pulsectl/device/codes.hpp"

#include <cmath>

namespace pulsectl {

namespace {

void require_amplitude(AmplitudeCode code) {
  if (!code.valid())
    throw RangeError("amplitude code " + std::to_string(code.value) + " outside 0..120");
}

void require_delay(DelayCode code) {
  if (!code.valid())
    throw RangeError("delay code " + std::to_string(code.value) + " outside -150..+150");
}

}

int amplitude_code_to_millivolts(AmplitudeCode code) {
  require_amplitude(code);
  return code.value * DeviceLimits::millivolts_per_step;
}

int delay_code_to_picoseconds(DelayCode code) {
  require_delay(code);
  return code.value * DeviceLimits::picoseconds_per_step;
}

double amplitude_code_to_volts(AmplitudeCode code) {
  require_amplitude(code);
  return code.value / 20.0;
}

AmplitudeCode volts_to_amplitude_code(double volts) {
  if (!(volts >= 0.0 && volts <= 6.0))
    throw RangeError("voltage " + std::to_string(volts) + " V outside 0..6 V");
  return AmplitudeCode(static_cast<int>(std::floor(volts * 20.0 + 0.5)));
}

double delay_code_to_seconds(DelayCode code) {
  require_delay(code);
  return code.value / 1e10;
}

std::vector<Violation> validate_settings(const ChannelSettings& settings) {
  std::vector<Violation> out;
  if (!settings.amplitude.valid())
    out.push_back({SettingsField::Amplitude,
                   std::string(settings.channel.label()) + ": amplitude code " +
                       std::to_string(settings.amplitude.value) + " outside 0..120"});
  if (!settings.delay.valid())
    out.push_back({SettingsField::Delay,
                   std::string(settings.channel.label()) + ": delay code " +
                       std::to_string(settings.delay.value) + " outside -150..+150"});
  return out;
}

}
