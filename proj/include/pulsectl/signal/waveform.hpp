#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace pulsectl {

class ConfigurationError: public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Uniformly sampled voltage trace. Sample n sits at t0 + n / sample_rate.
class Waveform {
  public:
    // Throws ConfigurationError unless sample_rate > 0, samples is non-empty and finite.
    Waveform(double sample_rate, double t0, std::vector<double> samples,
             std::optional<double> load_ohms = std::nullopt);

    double sample_rate() const { return sample_rate_; }
    double sample_period() const { return 1.0 / sample_rate_; }
    double t0() const { return t0_; }
    std::size_t size() const { return samples_.size(); }
    double time_at(std::size_t n) const { return t0_ + static_cast<double>(n) / sample_rate_; }
    const std::vector<double>& samples() const { return samples_; }
    double operator[](std::size_t n) const { return samples_[n]; }

    // Load the trace was rendered into, if the output stage annotated it.
    std::optional<double> load_ohms() const { return load_ohms_; }

    Waveform with_samples(std::vector<double> samples) const;
    Waveform with_t0(double t0) const;
    Waveform with_load(double ohms) const;

    friend bool operator==(const Waveform&, const Waveform&) = default;

  private:
    double sample_rate_;
    double t0_;
    std::vector<double> samples_;
    std::optional<double> load_ohms_;
};

}
