#include "pulsectl/bench/measure.hpp"

#include <algorithm>

namespace pulsectl::bench {

namespace {

struct Levels {
  double base;
  double top;
  double at(double fraction) const { return base + fraction * (top - base); }
};

Levels levels_of(const Waveform& w) {
  const auto [lo, hi] = std::minmax_element(w.samples().begin(), w.samples().end());
  return {*lo, *hi};
}

// Interpolated time between samples i and i+1 where the trace passes level.
double cross_time(const Waveform& w, std::size_t i, double level) {
  const double a = w[i], b = w[i + 1];
  return w.time_at(i) + (level - a) / (b - a) * w.sample_period();
}

bool rises_through(const Waveform& w, std::size_t i, double level) { return w[i] < level && level <= w[i + 1]; }
bool falls_through(const Waveform& w, std::size_t i, double level) { return w[i] >= level && level > w[i + 1]; }

// Index i (edge.begin <= i < edge.end) where the main edge passes the level.
std::optional<std::size_t> anchor_on_edge(const Waveform& w, const EdgeRun& edge, double level) {
  for (std::size_t i = edge.begin; i < edge.end; ++i)
    if (rises_through(w, i, level)) return i;
  return std::nullopt;
}

}

std::optional<EdgeRun> main_rising_edge(const Waveform& w) {
  std::optional<EdgeRun> best;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= w.size(); ++i) {
    if (i == w.size() || w[i] < w[i - 1]) {
      const double swing = w[i - 1] - w[begin];
      if (swing > 0.0 && (!best || swing > best->swing)) best = EdgeRun{begin, i - 1, swing};
      begin = i;
    }
  }
  return best;
}

double measure_vpp(const Waveform& w) {
  const auto l = levels_of(w);
  return l.top - l.base;
}

Measured rising_edge_crossing(const Waveform& w, double fraction) {
  const auto edge = main_rising_edge(w);
  if (!edge) return Measured::absent("no rising edge");
  const double level = levels_of(w).at(fraction);
  const auto i = anchor_on_edge(w, *edge, level);
  if (!i) return Measured::absent("main edge does not cross the reference level");
  return Measured::of(cross_time(w, *i, level));
}

Measured measure_rise_time(const Waveform& w) {
  const auto edge = main_rising_edge(w);
  if (!edge) return Measured::absent("no rising edge");
  const auto lv = levels_of(w);
  const auto mid = anchor_on_edge(w, *edge, lv.at(0.5));
  if (!mid) return Measured::absent("main edge does not cross 50 %");

  const double low = lv.at(0.1), high = lv.at(0.9);
  std::optional<double> t_low, t_high;
  for (std::size_t i = *mid + 1; i-- > 0;) {
    if (rises_through(w, i, low)) {
      t_low = cross_time(w, i, low);
      break;
    }
  }
  for (std::size_t i = *mid; i + 1 < w.size(); ++i) {
    if (rises_through(w, i, high)) {
      t_high = cross_time(w, i, high);
      break;
    }
  }
  if (!t_low || !t_high) return Measured::absent("edge does not span 10 %..90 %");
  return Measured::of(*t_high - *t_low);
}

Measured measure_width_fwhm(const Waveform& w) {
  const auto lv = levels_of(w);
  if (!(lv.top > lv.base)) return Measured::absent("no pulse");
  const double half = lv.at(0.5);
  const auto peak = static_cast<std::size_t>(std::max_element(w.samples().begin(), w.samples().end()) -
                                             w.samples().begin());
  std::optional<double> t_rise, t_fall;
  for (std::size_t i = peak; i-- > 0;) {
    if (rises_through(w, i, half)) {
      t_rise = cross_time(w, i, half);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < w.size(); ++i) {
    if (falls_through(w, i, half)) {
      t_fall = cross_time(w, i, half);
      break;
    }
  }
  if (!t_rise || !t_fall) return Measured::absent("pulse is not bounded by 50 % crossings");
  return Measured::of(*t_fall - *t_rise);
}

Measured measure_delay(const Waveform& reference, const Waveform& w) {
  const auto t_ref = rising_edge_crossing(reference, 0.5);
  if (!t_ref) return Measured::absent("reference: " + t_ref.reason());
  const auto t = rising_edge_crossing(w, 0.5);
  if (!t) return Measured::absent(t.reason());
  return Measured::of(*t - *t_ref);
}

std::optional<double> find_trigger(const Waveform& w, double level, TriggerEdge edge) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (edge == TriggerEdge::Rising ? rises_through(w, i, level) : falls_through(w, i, level))
      return cross_time(w, i, level);
  }
  return std::nullopt;
}

MeasurementReport measure(const Waveform& w, const Waveform* reference, const ChainModel& chain) {
  MeasurementReport r;
  r.vpp = measure_vpp(w);
  r.peak = levels_of(w).top;
  r.rise_time_10_90 = measure_rise_time(w);
  r.pulse_width_fwhm = measure_width_fwhm(w);
  if (reference) r.delay_vs_reference = measure_delay(*reference, w);

  constexpr double slack = 1e-9;
  if (r.vpp > chain.max_vpp_into_load + slack) r.flags.push_back("vpp_exceeds_capability");
  if (r.peak > chain.rail_peak + slack) r.flags.push_back("peak_exceeds_rail");
  if (r.peak > default_limits.max_volts + slack) r.flags.push_back("peak_above_commanded_range");
  return r;
}

}
