#include <doctest.h>

#include <random>

#include "pulsectl/proto/crc8.hpp"
#include "pulsectl/proto/device_state.hpp"
#include "pulsectl/proto/emulator.hpp"

using namespace pulsectl;
using namespace pulsectl::proto;

namespace {

FrameBytes hand_built(uint8_t op, uint8_t ch, uint16_t payload) {
  FrameBytes f{command_sof, op, ch, static_cast<uint8_t>(payload >> 8), static_cast<uint8_t>(payload), 0};
  f[5] = crc8(std::span(f).subspan(1, 4));
  return f;
}

Reply reply_of(const std::vector<uint8_t>& bytes) {
  REQUIRE(bytes.size() == frame_size);
  return std::get<Reply>(decode_reply(bytes));
}

}

TEST_CASE("fresh state") {
  const DeviceState s;
  for (std::size_t i = 0; i < channel_count; ++i) {
    CHECK(s.channels[i].channel.wire_index() == i);
    CHECK(s.channels[i].amplitude.value == 0);
    CHECK(s.channels[i].delay.value == 0);
    CHECK_FALSE(s.channels[i].enabled);
  }
  CHECK_FALSE(s.armed);
  CHECK_FALSE(s.pattern);
  CHECK(s.status_word() == 0);
}

TEST_CASE("apply_command") {
  const DeviceState fresh;
  auto [s1, r1] = apply_command(fresh, {Opcode::SetAmplitude, 3, 120});
  CHECK(r1.ok());
  CHECK(r1.value == 120);
  CHECK(s1.channels[3].amplitude.value == 120);

  auto [s2, r2] = apply_command(s1, {Opcode::GetAmplitude, 3, 0});
  CHECK(r2.ok());
  CHECK(r2.value == 120);
  CHECK(s2 == s1);

  auto [s3, r3] = apply_command(s1, {Opcode::SetAmplitude, 3, 200});
  CHECK(r3.status == ReplyStatus::NakRangeViolation);
  CHECK(s3 == s1);

  auto [s4, r4] = apply_command(s1, {Opcode::SetDelay, 3, delay_to_payload(DelayCode(-10))});
  CHECK(s4.channels[3].delay.value == -10);
  CHECK(apply_command(s4, {Opcode::GetDelay, 3, 0}).second.value == 140);

  auto [s5, r5] = apply_command(s4, {Opcode::SetEnable, 11, 1});
  CHECK(s5.channels[11].enabled);
  CHECK(apply_command(s5, {Opcode::GetStatus, device_wide, 0}).second.value == (1u << 11));

  auto [s6, r6] = apply_command(s5, {Opcode::Arm, device_wide, 0});
  CHECK(s6.armed);
  CHECK(r6.value == 1);
  CHECK(apply_command(s6, {Opcode::Arm, device_wide, 0}).first.armed == false);
  CHECK((apply_command(s6, {Opcode::GetStatus, device_wide, 0}).second.value & status_armed));
}

TEST_CASE("LoadPattern records slots in order") {
  DeviceState s;
  CHECK(apply_command(s, {Opcode::LoadPattern, device_wide, 1}).second.status == ReplyStatus::NakRangeViolation);
  s = apply_command(s, {Opcode::LoadPattern, device_wide, 0}).first;
  REQUIRE(s.pattern);
  CHECK(s.pattern->empty());
  CHECK((s.status_word() & status_pattern));

  s = apply_command(s, {Opcode::SetAmplitude, 0, 10}).first;
  s = apply_command(s, {Opcode::LoadPattern, device_wide, 1}).first;
  s = apply_command(s, {Opcode::SetAmplitude, 0, 20}).first;
  CHECK(apply_command(s, {Opcode::LoadPattern, device_wide, 3}).second.status == ReplyStatus::NakRangeViolation);
  s = apply_command(s, {Opcode::LoadPattern, device_wide, 2}).first;
  REQUIRE(s.pattern->size() == 2);
  CHECK((*s.pattern)[0][0].amplitude.value == 10);
  CHECK((*s.pattern)[1][0].amplitude.value == 20);
}

TEST_CASE("pure transition properties") {
  std::mt19937 rng(5);
  auto random_command = [&] {
    const auto op = all_opcodes[rng() % all_opcodes.size()];
    Command c{op, is_channel_scoped(op) ? static_cast<uint8_t>(rng() % 12) : device_wide, 0};
    const uint16_t top = max_payload(op);
    c.payload = top == 0 ? 0 : static_cast<uint16_t>(rng() % (std::min<int>(top, 400) + 2));
    return c;
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Command> cmds(60);
    for (auto& c : cmds) c = random_command();
    DeviceState a, b;
    for (const auto& c : cmds) {
      a = apply_command(a, c).first;
      b = apply_command(b, c).first;
    }
    CHECK(a == b);

    // Set* with the current value changes nothing and still ACKs.
    for (std::size_t ch = 0; ch < channel_count; ++ch) {
      const auto& cur = a.channels[ch];
      const auto u8 = static_cast<uint8_t>(ch);
      for (const Command& c : {Command{Opcode::SetAmplitude, u8, static_cast<uint16_t>(cur.amplitude.value)},
                               Command{Opcode::SetDelay, u8, delay_to_payload(cur.delay)},
                               Command{Opcode::SetEnable, u8, static_cast<uint16_t>(cur.enabled)}}) {
        auto [next, r] = apply_command(a, c);
        CHECK(r.ok());
        CHECK(next == a);
      }
    }
  }
}

TEST_CASE("emulator and session") {
  DeviceEmulator dev;
  DeviceSession session(dev);

  const auto set = encode_frame({Opcode::SetAmplitude, 3, 120});
  CHECK(reply_of(session.feed(set)) == Reply{ReplyStatus::Ack, 0x01, 120});
  CHECK(dev.snapshot().channels[3].amplitude.value == 120);

  const auto out_of_range = hand_built(0x01, 3, 200);
  CHECK(reply_of(session.feed(out_of_range)).status == ReplyStatus::NakRangeViolation);
  CHECK(dev.snapshot().channels[3].amplitude.value == 120);

  auto corrupt = encode_frame({Opcode::SetAmplitude, 3, 7});
  corrupt[4] ^= 0x01;
  const auto nak = reply_of(session.feed(corrupt));
  CHECK(nak.status == ReplyStatus::NakBadCrc);
  CHECK(nak.opcode == 0x01);
  CHECK(dev.snapshot().channels[3].amplitude.value == 120);

  CHECK(reply_of(session.feed(hand_built(0x42, 0, 0))).status == ReplyStatus::NakBadOpcode);

  // Garbage is skipped silently, the frame after it is answered.
  std::vector<uint8_t> noisy{0x00, 0x13, 0x37};
  const auto get = encode_frame({Opcode::GetAmplitude, 3, 0});
  noisy.insert(noisy.end(), get.begin(), get.end());
  CHECK(reply_of(session.feed(noisy)).value == 120);
  // The 5 bytes after the corrupt frame's SOF were resynchronised over, then 3 more.
  CHECK(dev.counters().garbage_bytes == 8);

  // Split delivery.
  const auto en = encode_frame({Opcode::SetEnable, 0, 1});
  CHECK(session.feed(std::span(en).first(2)).empty());
  CHECK(reply_of(session.feed(std::span(en).subspan(2))).ok());
  CHECK(dev.snapshot().channels[0].enabled);
  CHECK(dev.counters().commands == 3);
  CHECK(dev.counters().naks == 3);
}

TEST_CASE("listeners see every applied command in order") {
  DeviceEmulator dev;
  std::vector<Command> seen;
  const auto id = dev.subscribe([&](const Command& c, const Reply&, const DeviceState&) { seen.push_back(c); });
  dev.execute({Opcode::SetAmplitude, 1, 5});
  dev.execute({Opcode::GetStatus, device_wide, 0});
  dev.unsubscribe(id);
  dev.execute({Opcode::SetAmplitude, 1, 6});
  REQUIRE(seen.size() == 2);
  CHECK(seen[0].opcode == Opcode::SetAmplitude);
  CHECK(seen[1].opcode == Opcode::GetStatus);
}

TEST_CASE("render follows the commanded settings") {
  DeviceEmulator dev;
  dev.execute({Opcode::SetAmplitude, 0, 120});
  dev.execute({Opcode::SetEnable, 0, 1});
  const CaptureConfig cap;
  const auto w = dev.render(channels::AC1(), cap);
  CHECK(w == synthesize({channels::AC1(), AmplitudeCode(120), DelayCode(0), true}, {}, ChainModel{}, cap));
  const auto quiet = dev.render(channels::AC2(), cap);
  for (double v : quiet.samples()) CHECK(v == 0.0);
}
