#include "pulsectl/planner/modulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pulsectl::planner {

namespace {

void require_v_pi(double v_pi) {
  if (!(v_pi > 0.0) || !std::isfinite(v_pi)) throw RangeError("half-wave voltage must be positive");
}

}

double intensity_transmission(double volts, double v_pi) {
  require_v_pi(v_pi);
  if (volts > v_pi && volts <= v_pi * (1.0 + 1e-9)) volts = v_pi;
  if (!(volts >= 0.0 && volts <= v_pi))
    throw RangeError("drive " + std::to_string(volts) + " V outside the monotone branch [0, v_pi]");
  const double s = std::sin(std::numbers::pi * volts / (2.0 * v_pi));
  return s * s;
}

double phase_shift(double volts, double v_pi) {
  require_v_pi(v_pi);
  if (!(volts >= 0.0)) throw RangeError("phase drive must be non-negative");
  return std::numbers::pi * volts / v_pi;
}

AmplitudeCode branch_top_code(double v_pi) {
  require_v_pi(v_pi);
  const int top = static_cast<int>(std::floor(v_pi * 20.0 * (1.0 + 1e-12)));
  return AmplitudeCode(std::min(top, DeviceLimits::amplitude_code_max));
}

Setpoint voltage_for_transmission(double transmission, double v_pi) {
  require_v_pi(v_pi);
  if (!(transmission >= 0.0 && transmission <= 1.0))
    throw RangeError("transmission " + std::to_string(transmission) + " outside [0, 1]");
  Setpoint sp;
  sp.target = transmission;
  sp.volts = 2.0 * v_pi / std::numbers::pi * std::asin(std::sqrt(transmission));
  if (sp.volts > default_limits.max_volts + 1e-12)
    throw UnreachableSetpoint("transmission " + std::to_string(transmission) + " needs " +
                              std::to_string(sp.volts) + " V, beyond the 6 V range");
  sp.code = volts_to_amplitude_code(std::min(sp.volts, default_limits.max_volts));
  // Rounding up past v_pi would fold back onto the falling branch.
  if (amplitude_code_to_volts(sp.code) > v_pi) sp.code = branch_top_code(v_pi);
  sp.achieved = intensity_transmission(amplitude_code_to_volts(sp.code), v_pi);
  return sp;
}

AmplitudeCode code_for_phase(double radians, double v_pi) {
  require_v_pi(v_pi);
  if (!(radians >= 0.0 && radians <= std::numbers::pi + 1e-12))
    throw RangeError("phase outside [0, pi]");
  const double volts = radians * v_pi / std::numbers::pi;
  if (volts > default_limits.max_volts + 1e-12)
    throw UnreachableSetpoint("phase " + std::to_string(radians) + " rad needs " + std::to_string(volts) +
                              " V, beyond the 6 V range");
  return volts_to_amplitude_code(std::min(volts, default_limits.max_volts));
}

}
