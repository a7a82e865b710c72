#include "pulsectl/signal/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pulsectl {

namespace {

// Sample positions closer than this to an integer are treated as exact.
constexpr double index_snap = 1e-6;

long first_index_at_or_after(double t, double sample_rate) {
  return static_cast<long>(std::ceil(t * sample_rate - index_snap));
}

}

double default_edge_tau() { return 1e-9 / std::log(9.0); }

Waveform ideal_pulse(const ChannelSettings& settings, const PulseTiming& timing, double sample_rate,
                     double duration) {
  if (!(sample_rate > 0.0)) throw ConfigurationError("sample rate must be positive");
  if (!(timing.width > 0.0)) throw ConfigurationError("pulse width must be positive");
  const auto count = static_cast<long>(std::llround(duration * sample_rate));
  if (count < 1) throw ConfigurationError("capture window holds no samples");

  const double delay = delay_code_to_seconds(settings.delay);
  const double delayed_start = timing.start + delay;
  const double slack = index_snap / sample_rate;
  if (delayed_start < -slack || delayed_start + timing.width > duration + slack)
    throw ConfigurationError("capture window too short for the delayed pulse");

  std::vector<double> samples(static_cast<std::size_t>(count), 0.0);
  const double volts = amplitude_code_to_volts(settings.amplitude);
  if (settings.enabled && volts > 0.0) {
    const long begin = std::max(0L, first_index_at_or_after(timing.start, sample_rate));
    const long end = std::min(count, first_index_at_or_after(timing.start + timing.width, sample_rate));
    for (long n = begin; n < end; ++n) samples[static_cast<std::size_t>(n)] = volts;
  }
  return Waveform(sample_rate, 0.0, std::move(samples));
}

Waveform apply_delay(const Waveform& w, double delay) {
  if (std::abs(delay) > default_limits.delay_span * (1 + 1e-12))
    throw RangeError("delay outside the +/-15 ns span");
  const double shift = delay * w.sample_rate();
  double whole = std::floor(shift + index_snap);
  double frac = shift - whole;
  if (frac < index_snap) frac = 0.0;

  const auto& in = w.samples();
  const long n_samples = static_cast<long>(in.size());
  const long k = static_cast<long>(whole);
  auto at = [&](long i) { return (i >= 0 && i < n_samples) ? in[static_cast<std::size_t>(i)] : 0.0; };

  std::vector<double> out(in.size());
  for (long n = 0; n < n_samples; ++n) {
    out[static_cast<std::size_t>(n)] = frac == 0.0 ? at(n - k) : (1.0 - frac) * at(n - k) + frac * at(n - k - 1);
  }
  return w.with_samples(std::move(out));
}

Waveform apply_edge_filter(const Waveform& w, double tau) {
  if (!(tau > 0.0)) throw ConfigurationError("edge time constant must be positive");
  const double gain = -std::expm1(-w.sample_period() / tau);  // 1 - exp(-dt/tau)
  const auto& in = w.samples();
  std::vector<double> out(in.size());
  out[0] = in[0];
  for (std::size_t n = 1; n < in.size(); ++n) out[n] = out[n - 1] + gain * (in[n - 1] - out[n - 1]);
  return w.with_samples(std::move(out));
}

Waveform apply_output_stage(const Waveform& w, const ChainModel& chain) {
  const double lo = chain.polarity < 0 ? -chain.rail_peak : 0.0;
  const double hi = chain.polarity < 0 ? 0.0 : chain.rail_peak;
  std::vector<double> out = w.samples();
  for (auto& v : out) v = std::clamp(v, lo, hi);
  return Waveform(w.sample_rate(), w.t0(), std::move(out), chain.load_ohms);
}

Waveform synthesize(const ChannelSettings& settings, const PulseTiming& timing, const ChainModel& chain,
                    const CaptureConfig& capture) {
  if (auto violations = validate_settings(settings); !violations.empty())
    throw RangeError(violations.front().message);
  auto trace = ideal_pulse(settings, timing, capture.sample_rate, capture.window);
  trace = apply_delay(trace, delay_code_to_seconds(settings.delay));
  trace = apply_edge_filter(trace, chain.tau);
  if (chain.polarity < 0) {
    std::vector<double> inverted = trace.samples();
    for (auto& v : inverted) v = -v;
    trace = trace.with_samples(std::move(inverted));
  }
  trace = apply_output_stage(trace, chain);
  if (chain.noise_sigma > 0.0) {
    std::mt19937_64 rng(chain.noise_seed);
    std::normal_distribution<double> noise(0.0, chain.noise_sigma);
    std::vector<double> noisy = trace.samples();
    for (auto& v : noisy) v += noise(rng);
    trace = trace.with_samples(std::move(noisy));
  }
  return trace;
}

}
