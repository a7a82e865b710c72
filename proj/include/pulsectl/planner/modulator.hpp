#pragma once

#include <stdexcept>

#include "pulsectl/device/codes.hpp"

namespace pulsectl::planner {

class UnreachableSetpoint: public std::range_error {
  public:
    using std::range_error::range_error;
};

// Mach-Zehnder intensity transfer on its first monotone branch:
// T(v) = sin^2(pi v / (2 v_pi)) for 0 <= v <= v_pi.
double intensity_transmission(double volts, double v_pi);

// Linear phase modulator: pi v / v_pi, for v >= 0.
double phase_shift(double volts, double v_pi);

struct Setpoint {
  double target = 0.0;    // requested transmission
  double volts = 0.0;     // unquantised drive voltage
  AmplitudeCode code;     // nearest grid code on the monotone branch
  double achieved = 0.0;  // transmission at the quantised voltage

  double residual() const { return achieved - target; }
};

// Inverse transfer v = (2 v_pi / pi) asin(sqrt(t)), quantised to the 0.05 V grid.
// Throws UnreachableSetpoint when v exceeds the 6 V range.
Setpoint voltage_for_transmission(double transmission, double v_pi);

// Drive code for a phase in [0, pi]; throws UnreachableSetpoint past 6 V.
AmplitudeCode code_for_phase(double radians, double v_pi);

// Largest code whose voltage stays on the monotone branch (and on the grid).
AmplitudeCode branch_top_code(double v_pi);

}
