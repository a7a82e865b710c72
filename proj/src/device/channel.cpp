#include "pulsectl/device/channel.hpp"

#include <stdexcept>
#include <string>

namespace pulsectl {

namespace {

struct ChannelInfo {
  std::string_view label;
  ChannelGroup group;
  int index_in_group;
};

// Canonical wire order.
constexpr std::array<ChannelInfo, channel_count> channel_table{{
  {"AC1", ChannelGroup::Chopper, 1},
  {"AC2", ChannelGroup::Chopper, 2},
  {"AD1", ChannelGroup::Decoy, 1},
  {"AD2", ChannelGroup::Decoy, 2},
  {"AD3", ChannelGroup::Decoy, 3},
  {"AD4", ChannelGroup::Decoy, 4},
  {"AU1", ChannelGroup::Normalization, 1},
  {"AU2", ChannelGroup::Normalization, 2},
  {"AP1", ChannelGroup::Phase, 1},
  {"AP2", ChannelGroup::Phase, 2},
  {"AT1", ChannelGroup::Time, 1},
  {"AT2", ChannelGroup::Time, 2},
}};

}

std::string_view to_string(ChannelGroup group) {
  switch (group) {
    case ChannelGroup::Chopper: return "chopper";
    case ChannelGroup::Decoy: return "decoy";
    case ChannelGroup::Normalization: return "normalization";
    case ChannelGroup::Phase: return "phase";
    case ChannelGroup::Time: return "time";
  }
  return "?";
}

std::optional<ChannelGroup> parse_group(std::string_view name) {
  for (auto g : {ChannelGroup::Chopper, ChannelGroup::Decoy, ChannelGroup::Normalization,
                 ChannelGroup::Phase, ChannelGroup::Time})
    if (to_string(g) == name) return g;
  return std::nullopt;
}

ChannelId ChannelId::from_wire(int wire_index) {
  if (wire_index < 0 || wire_index >= static_cast<int>(channel_count))
    throw std::out_of_range("wire index " + std::to_string(wire_index) + " outside 0..11");
  return ChannelId(static_cast<uint8_t>(wire_index));
}

std::optional<ChannelId> ChannelId::from_label(std::string_view label) {
  for (std::size_t i = 0; i < channel_count; ++i)
    if (channel_table[i].label == label) return ChannelId(static_cast<uint8_t>(i));
  return std::nullopt;
}

const std::array<ChannelId, channel_count>& ChannelId::all() {
  static const auto ids = [] {
    std::array<ChannelId, channel_count> out;
    for (std::size_t i = 0; i < channel_count; ++i) out[i] = ChannelId(static_cast<uint8_t>(i));
    return out;
  }();
  return ids;
}

ChannelGroup ChannelId::group() const { return channel_table[wire_].group; }
int ChannelId::index_in_group() const { return channel_table[wire_].index_in_group; }
std::string_view ChannelId::label() const { return channel_table[wire_].label; }

std::size_t group_size(ChannelGroup group) {
  std::size_t n = 0;
  for (const auto& info : channel_table)
    if (info.group == group) ++n;
  return n;
}

namespace channels {
ChannelId AC1() { return ChannelId::from_wire(0); }
ChannelId AC2() { return ChannelId::from_wire(1); }
ChannelId AD1() { return ChannelId::from_wire(2); }
ChannelId AD2() { return ChannelId::from_wire(3); }
ChannelId AD3() { return ChannelId::from_wire(4); }
ChannelId AD4() { return ChannelId::from_wire(5); }
ChannelId AU1() { return ChannelId::from_wire(6); }
ChannelId AU2() { return ChannelId::from_wire(7); }
ChannelId AP1() { return ChannelId::from_wire(8); }
ChannelId AP2() { return ChannelId::from_wire(9); }
ChannelId AT1() { return ChannelId::from_wire(10); }
ChannelId AT2() { return ChannelId::from_wire(11); }
}

}
