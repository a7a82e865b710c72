#include "pulsectl/device/channel_map.hpp"

#include <bitset>
#include <fstream>
#include <sstream>

namespace pulsectl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}

ChannelMapError::ChannelMapError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "channel map line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

ChannelMap ChannelMap::canonical() {
  ChannelMap map;
  for (auto id : ChannelId::all())
    map.entries_[id.wire_index()] = {std::string(id.label()), id.wire_index(), id.group()};
  return map;
}

ChannelMap ChannelMap::parse(std::string_view text) {
  ChannelMap map;
  std::bitset<channel_count> seen_label, seen_index;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const auto comma = line.find(',', eq == std::string_view::npos ? 0 : eq);
    if (eq == std::string_view::npos || comma == std::string_view::npos)
      throw ChannelMapError(line_no, "expected `LABEL = index, group`");
    const auto label = trim(line.substr(0, eq));
    const auto index_text = trim(line.substr(eq + 1, comma - eq - 1));
    const auto group_text = trim(line.substr(comma + 1));

    const auto id = ChannelId::from_label(label);
    if (!id) throw ChannelMapError(line_no, "unknown channel label '" + std::string(label) + "'");
    if (seen_label[id->wire_index()])
      throw ChannelMapError(line_no, "duplicate label '" + std::string(label) + "'");

    int index = -1;
    try {
      std::size_t used = 0;
      index = std::stoi(std::string(index_text), &used);
      if (used != index_text.size()) index = -1;
    } catch (const std::exception&) {
      index = -1;
    }
    if (index < 0 || index >= static_cast<int>(channel_count))
      throw ChannelMapError(line_no, "wire index '" + std::string(index_text) + "' outside 0..11");
    if (seen_index[index])
      throw ChannelMapError(line_no, "duplicate wire index " + std::to_string(index));

    const auto group = parse_group(group_text);
    if (!group) throw ChannelMapError(line_no, "unknown group '" + std::string(group_text) + "'");
    if (*group != id->group())
      throw ChannelMapError(line_no, std::string(label) + " belongs to group " +
                                         std::string(to_string(id->group())));

    seen_label[id->wire_index()] = true;
    seen_index[index] = true;
    map.entries_[id->wire_index()] = {std::string(label), index, *group};
  }
  if (!seen_label.all()) {
    for (auto id : ChannelId::all())
      if (!seen_label[id.wire_index()])
        throw ChannelMapError(0, "channel map is missing " + std::string(id.label()));
  }
  return map;
}

ChannelMap ChannelMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ChannelMapError(0, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<ChannelId> ChannelMap::resolve(std::string_view label) const {
  for (const auto& e : entries_)
    if (e.label == label) return ChannelId::from_label(label);
  return std::nullopt;
}

std::string ChannelMap::to_text() const {
  std::ostringstream out;
  out << "# label = wire_index, group\n";
  for (const auto& e : entries_) out << e.label << " = " << e.wire_index << ", " << to_string(e.group) << '\n';
  return out.str();
}

}
