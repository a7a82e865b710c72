#include "pulsectl/proto/emulator.hpp"

namespace pulsectl::proto {

DeviceEmulator::DeviceEmulator(ChainModel chain, PulseTiming timing): chain_(chain), timing_(timing) {}

Reply DeviceEmulator::execute(const Command& c) {
  std::lock_guard lock(mutex_);
  auto [next, reply] = apply_command(state_, c);
  state_ = std::move(next);
  ++counters_.commands;
  if (!reply.ok()) ++counters_.naks;
  for (auto& [id, listener] : listeners_) listener(c, reply, state_);
  return reply;
}

Reply DeviceEmulator::reject(FrameError error, const FrameBytes& raw) {
  std::lock_guard lock(mutex_);
  ++counters_.naks;
  return Reply{nak_for(error), raw[1], static_cast<uint16_t>((raw[3] << 8) | raw[4])};
}

void DeviceEmulator::note_garbage(std::size_t bytes) {
  std::lock_guard lock(mutex_);
  counters_.garbage_bytes += bytes;
}

DeviceState DeviceEmulator::snapshot() const {
  std::lock_guard lock(mutex_);
  DeviceState copy = state_;
  copy.uptime_ms = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started_).count());
  return copy;
}

DeviceEmulator::Counters DeviceEmulator::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

Waveform DeviceEmulator::render(ChannelId channel, const CaptureConfig& capture) const {
  return render(channel, capture, timing_);
}

Waveform DeviceEmulator::render(ChannelId channel, const CaptureConfig& capture, const PulseTiming& timing) const {
  ChannelSettings settings;
  {
    std::lock_guard lock(mutex_);
    settings = state_.channels[channel.wire_index()];
  }
  return synthesize(settings, timing, chain_, capture);
}

std::size_t DeviceEmulator::subscribe(Listener listener) {
  std::lock_guard lock(mutex_);
  const auto id = next_listener_++;
  listeners_.emplace(id, std::move(listener));
  return id;
}

void DeviceEmulator::unsubscribe(std::size_t id) {
  std::lock_guard lock(mutex_);
  listeners_.erase(id);
}

std::vector<uint8_t> DeviceSession::feed(std::span<const uint8_t> bytes) {
  scanner_.feed(bytes);
  std::vector<uint8_t> out;
  while (true) {
    const std::size_t before = scanner_.position();
    auto event = scanner_.next();
    if (!event) break;
    Reply reply;
    if (auto* cmd = std::get_if<Command>(&event->item)) {
      reply = device_.execute(*cmd);
    } else if (event->raw) {
      reply = device_.reject(std::get<DecodeFailure>(event->item).error, *event->raw);
    } else {
      device_.note_garbage(scanner_.position() - before);
      continue;
    }
    const auto frame = encode_reply(reply);
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

}
