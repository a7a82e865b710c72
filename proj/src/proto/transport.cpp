#include "pulsectl/proto/transport.hpp"

namespace pulsectl::proto {

void LoopbackTransport::send(std::span<const uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  const auto reply = session_.feed(bytes);
  inbound_.insert(inbound_.end(), reply.begin(), reply.end());
  ready_.notify_all();
}

std::optional<std::vector<uint8_t>> LoopbackTransport::receive(std::size_t n, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  if (!ready_.wait_for(lock, timeout, [&] { return inbound_.size() >= n; })) return std::nullopt;
  std::vector<uint8_t> out(inbound_.begin(), inbound_.begin() + static_cast<std::ptrdiff_t>(n));
  inbound_.erase(inbound_.begin(), inbound_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void LoopbackTransport::discard_input() {
  std::lock_guard lock(mutex_);
  inbound_.clear();
}

void FaultInjectingTransport::send(std::span<const uint8_t> bytes) {
  const std::size_t index = writes_++;
  if (drop && drop(index)) return;
  std::vector<uint8_t> out(bytes.begin(), bytes.end());
  if (mutate) mutate(index, out);
  inner_.send(out);
}

}
