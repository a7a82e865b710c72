#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pulsectl/device/channel.hpp"

namespace pulsectl {

class ChannelMapError: public std::runtime_error {
  public:
    ChannelMapError(int line, const std::string& what);
    int line() const { return line_; }

  private:
    int line_;
};

struct ChannelMapEntry {
  std::string label;
  int wire_index = 0;
  ChannelGroup group = ChannelGroup::Chopper;
};

// Label <-> wire index table. The text form is one `LABEL = index, group` line
// per output; `#` starts a comment.
class ChannelMap {
  public:
    static ChannelMap canonical();
    static ChannelMap parse(std::string_view text);
    static ChannelMap load(const std::filesystem::path& path);

    std::optional<ChannelId> resolve(std::string_view label) const;
    // Wire index the host must put on the bus for this output.
    int wire_index(ChannelId id) const { return entries_[id.wire_index()].wire_index; }
    const ChannelMapEntry& entry(ChannelId id) const { return entries_[id.wire_index()]; }
    std::string to_text() const;

  private:
    // Indexed by the channel's canonical wire index.
    std::array<ChannelMapEntry, channel_count> entries_;
};

}
