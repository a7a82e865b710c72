#include "pulsectl/signal/waveform.hpp"

#include <cmath>

namespace pulsectl {

Waveform::Waveform(double sample_rate, double t0, std::vector<double> samples,
                   std::optional<double> load_ohms)
    : sample_rate_(sample_rate), t0_(t0), samples_(std::move(samples)), load_ohms_(load_ohms) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw ConfigurationError("waveform sample rate must be positive");
  if (!std::isfinite(t0_)) throw ConfigurationError("waveform t0 must be finite");
  if (samples_.empty()) throw ConfigurationError("waveform has no samples");
  for (double v : samples_)
    if (!std::isfinite(v)) throw ConfigurationError("waveform contains a non-finite sample");
}

Waveform Waveform::with_samples(std::vector<double> samples) const {
  return Waveform(sample_rate_, t0_, std::move(samples), load_ohms_);
}

Waveform Waveform::with_t0(double t0) const {
  return Waveform(sample_rate_, t0, samples_, load_ohms_);
}

Waveform Waveform::with_load(double ohms) const {
  return Waveform(sample_rate_, t0_, samples_, ohms);
}

}
