#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsectl/proto/emulator.hpp"

namespace pulsectl::proto {

class TransportError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Byte pipe to a device. Every implementation carries the same byte semantics.
class Transport {
  public:
    virtual ~Transport() = default;

    virtual void send(std::span<const uint8_t> bytes) = 0;
    // Exactly n bytes, or nothing if they did not arrive within the timeout.
    virtual std::optional<std::vector<uint8_t>> receive(std::size_t n, std::chrono::milliseconds timeout) = 0;
    // Drop anything already received but not yet read.
    virtual void discard_input() = 0;
    virtual std::string name() const = 0;
};

// In-process connection straight into an emulator.
class LoopbackTransport: public Transport {
  public:
    explicit LoopbackTransport(DeviceEmulator& device): session_(device) {}

    void send(std::span<const uint8_t> bytes) override;
    std::optional<std::vector<uint8_t>> receive(std::size_t n, std::chrono::milliseconds timeout) override;
    void discard_input() override;
    std::string name() const override { return "loopback"; }

  private:
    std::mutex mutex_;
    std::condition_variable ready_;
    DeviceSession session_;
    std::deque<uint8_t> inbound_;
};

// Decorator that loses or mangles outgoing writes. Write k (0-based) is dropped
// when drop(k) is true; mutate may rewrite the bytes that do go out.
class FaultInjectingTransport: public Transport {
  public:
    explicit FaultInjectingTransport(Transport& inner): inner_(inner) {}

    std::function<bool(std::size_t)> drop;
    std::function<void(std::size_t, std::vector<uint8_t>&)> mutate;

    void send(std::span<const uint8_t> bytes) override;
    std::optional<std::vector<uint8_t>> receive(std::size_t n, std::chrono::milliseconds timeout) override {
      return inner_.receive(n, timeout);
    }
    void discard_input() override { inner_.discard_input(); }
    std::string name() const override { return inner_.name(); }
    std::size_t writes() const { return writes_; }

  private:
    Transport& inner_;
    std::size_t writes_ = 0;
};

}
