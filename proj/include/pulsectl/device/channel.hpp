#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace pulsectl {

// Functional group of an output, one per on-board DAC.
enum class ChannelGroup : uint8_t {
  Chopper,
  Decoy,
  Normalization,
  Phase,
  Time
};

std::string_view to_string(ChannelGroup group);
std::optional<ChannelGroup> parse_group(std::string_view name);

inline constexpr std::size_t channel_count = 12;

class ChannelId {
  public:
    constexpr ChannelId(): wire_(0) {}

    // Throws std::out_of_range for wire indices outside 0..11.
    static ChannelId from_wire(int wire_index);
    static std::optional<ChannelId> from_label(std::string_view label);

    static const std::array<ChannelId, channel_count>& all();

    constexpr uint8_t wire_index() const { return wire_; }
    ChannelGroup group() const;
    // 1-based position inside the group (AD3 -> 3)
    int index_in_group() const;
    std::string_view label() const;

    friend constexpr bool operator==(ChannelId, ChannelId) = default;
    friend constexpr auto operator<=>(ChannelId, ChannelId) = default;

  private:
    explicit constexpr ChannelId(uint8_t wire): wire_(wire) {}
    uint8_t wire_;
};

std::size_t group_size(ChannelGroup group);

namespace channels {
ChannelId AC1();
ChannelId AC2();
ChannelId AD1();
ChannelId AD2();
ChannelId AD3();
ChannelId AD4();
ChannelId AU1();
ChannelId AU2();
ChannelId AP1();
ChannelId AP2();
ChannelId AT1();
ChannelId AT2();
}

}
