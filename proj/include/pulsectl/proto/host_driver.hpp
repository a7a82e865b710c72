#pragma once

#include <chrono>
#include <mutex>
#include <stdexcept>
#include <string>

#include "pulsectl/device/codes.hpp"
#include "pulsectl/proto/frame.hpp"
#include "pulsectl/proto/transport.hpp"

namespace pulsectl::proto {

class ProtocolError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class TransportTimeout: public ProtocolError {
  public:
    TransportTimeout(Opcode op, int attempts);
    Opcode opcode() const { return opcode_; }

  private:
    Opcode opcode_;
};

class NakError: public ProtocolError {
  public:
    NakError(Opcode op, ReplyStatus status);
    Opcode opcode() const { return opcode_; }
    ReplyStatus status() const { return status_; }

  private:
    Opcode opcode_;
    ReplyStatus status_;
};

// A multi-frame update failed after at least one frame was applied.
class PartialUpdateError: public ProtocolError {
  public:
    PartialUpdateError(Opcode failed_step, const std::string& cause);
    Opcode failed_step() const { return failed_step_; }

  private:
    Opcode failed_step_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds timeout{100};
};

// Host side of the serial protocol. One frame is in flight per driver; calls
// from several threads are serialised.
class HostDriver {
  public:
    explicit HostDriver(Transport& transport, RetryPolicy policy = {})
        : transport_(transport), policy_(policy) {}

    // Sends the frame and waits for its reply, retrying on silence, on a
    // corrupted reply and on NAK(BadCrc). Other NAKs are returned as-is.
    Reply transact(const Command& c);

    void set_amplitude(ChannelId ch, AmplitudeCode code);
    void set_delay(ChannelId ch, DelayCode code);
    void set_enabled(ChannelId ch, bool enabled);
    AmplitudeCode get_amplitude(ChannelId ch);
    DelayCode get_delay(ChannelId ch);
    uint16_t get_status();
    bool arm();
    void load_pattern(uint16_t slot_count);

    // SetAmplitude then SetDelay, both acknowledged.
    void set_channel(ChannelId ch, AmplitudeCode amplitude, DelayCode delay);

    Transport& transport() { return transport_; }

  private:
    Reply checked(const Command& c);

    Transport& transport_;
    RetryPolicy policy_;
    std::mutex mutex_;
};

}
