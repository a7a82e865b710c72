#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pulsectl/device/codes.hpp"
#include "pulsectl/signal/chain.hpp"
#include "pulsectl/signal/waveform.hpp"

namespace pulsectl::bench {

// A measurement that may be absent, with the reason when it is.
class Measured {
  public:
    static Measured of(double v) { return Measured(v, {}); }
    static Measured absent(std::string reason) { return Measured(std::nullopt, std::move(reason)); }

    bool has_value() const { return value_.has_value(); }
    explicit operator bool() const { return has_value(); }
    double value() const { return value_.value(); }
    double operator*() const { return *value_; }
    const std::string& reason() const { return reason_; }

  private:
    Measured(std::optional<double> v, std::string reason): value_(v), reason_(std::move(reason)) {}
    std::optional<double> value_;
    std::string reason_;
};

// Sample range [begin, end] of the main rising edge: the non-decreasing run with
// the largest swing, earliest on ties.
struct EdgeRun {
  std::size_t begin = 0;
  std::size_t end = 0;
  double swing = 0.0;
};
std::optional<EdgeRun> main_rising_edge(const Waveform& w);

// max - min
double measure_vpp(const Waveform& w);

// Interpolated time where the main rising edge crosses base + fraction * (top - base),
// with base/top the trace minimum/maximum.
Measured rising_edge_crossing(const Waveform& w, double fraction);

// Last 10 % crossing before and first 90 % crossing after the main edge.
Measured measure_rise_time(const Waveform& w);
// Between the 50 %-of-peak crossings around the maximum.
Measured measure_width_fwhm(const Waveform& w);
// 50 % crossing of w minus 50 % crossing of reference.
Measured measure_delay(const Waveform& reference, const Waveform& w);

// Time of the first crossing of level in the given direction.
std::optional<double> find_trigger(const Waveform& w, double level, TriggerEdge edge);

struct MeasurementReport {
  double vpp = 0.0;
  double peak = 0.0;
  Measured rise_time_10_90 = Measured::absent("not measured");
  Measured pulse_width_fwhm = Measured::absent("not measured");
  Measured delay_vs_reference = Measured::absent("no reference");
  // Limit violations, e.g. "vpp_exceeds_capability".
  std::vector<std::string> flags;
};

// Flags compare against the chain's rail and Vpp capability and the 6 V
// commanded range.
MeasurementReport measure(const Waveform& w, const Waveform* reference, const ChainModel& chain);

}
