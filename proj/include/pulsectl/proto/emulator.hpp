#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "pulsectl/proto/device_state.hpp"
#include "pulsectl/proto/frame.hpp"
#include "pulsectl/signal/chain.hpp"

namespace pulsectl::proto {

// Device side of the module: owns the DeviceState and applies commands strictly
// one at a time. Its outputs can be probed as rendered waveforms.
class DeviceEmulator {
  public:
    // Called with the emulator lock held, in application order. Listeners must
    // not call back into the emulator.
    using Listener = std::function<void(const Command&, const Reply&, const DeviceState&)>;

    struct Counters {
      uint64_t commands = 0;
      uint64_t naks = 0;
      uint64_t garbage_bytes = 0;
    };

    explicit DeviceEmulator(ChainModel chain = {}, PulseTiming timing = {});

    Reply execute(const Command& c);
    // NAK for a frame that arrived whole but failed decoding.
    Reply reject(FrameError error, const FrameBytes& raw);
    void note_garbage(std::size_t bytes);

    DeviceState snapshot() const;
    ChainModel chain() const { return chain_; }
    PulseTiming timing() const { return timing_; }
    Counters counters() const;

    // Output of one channel as seen by a scope on the 50 ohm load, rendered from
    // a single consistent snapshot.
    Waveform render(ChannelId channel, const CaptureConfig& capture) const;
    Waveform render(ChannelId channel, const CaptureConfig& capture, const PulseTiming& timing) const;

    std::size_t subscribe(Listener listener);
    void unsubscribe(std::size_t id);

  private:
    mutable std::mutex mutex_;
    DeviceState state_;
    ChainModel chain_;
    PulseTiming timing_;
    Counters counters_;
    std::map<std::size_t, Listener> listeners_;
    std::size_t next_listener_ = 0;
    std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

// Byte-stream front end for one connection: frames in, reply frames out.
// Garbage is skipped silently; whole frames that fail decoding are NAKed.
class DeviceSession {
  public:
    explicit DeviceSession(DeviceEmulator& device): device_(device) {}

    std::vector<uint8_t> feed(std::span<const uint8_t> bytes);

  private:
    DeviceEmulator& device_;
    FrameScanner scanner_;
};

}
