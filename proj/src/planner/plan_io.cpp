#include "pulsectl/planner/plan_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace pulsectl::planner {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

int parse_int(std::string_view s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

template <class F>
auto at_line(int line, F&& f) {
  try {
    return f();
  } catch (const PlanFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw PlanFormatError(line, e.what());
  }
}

}

PlanFormatError::PlanFormatError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

QkdSymbol parse_symbol(std::string_view text) {
  const auto fields = split(text, ',');
  if (fields.size() != 3) throw std::invalid_argument("expected intensity,basis,bit");
  QkdSymbol s;
  const auto intensity = lower(fields[0]);
  if (intensity == "signal") s.intensity = Intensity::Signal;
  else if (intensity == "decoy") s.intensity = Intensity::Decoy;
  else if (intensity == "vacuum") s.intensity = Intensity::Vacuum;
  else throw std::invalid_argument("unknown intensity class '" + std::string(fields[0]) + "'");
  const auto basis = lower(fields[1]);
  if (basis == "z") s.basis = Basis::Z;
  else if (basis == "x") s.basis = Basis::X;
  else throw std::invalid_argument("unknown basis '" + std::string(fields[1]) + "'");
  s.bit = parse_int(fields[2], "bit");
  if (s.bit != 0 && s.bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  return s;
}

std::vector<QkdSymbol> parse_symbols(std::string_view text) {
  std::vector<QkdSymbol> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view view = raw;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    out.push_back(at_line(line, [&] { return parse_symbol(view); }));
  }
  return out;
}

std::string format_symbol(const QkdSymbol& s) {
  return std::string(to_string(s.intensity)) + "," + std::string(to_string(s.basis)) + "," + std::to_string(s.bit);
}

std::string format_plan(const PulsePlan& plan) {
  std::ostringstream out;
  for (const auto& slot : plan.slots) {
    out << slot.index << " | " << format_symbol(slot.symbol) << " | ";
    for (std::size_t i = 0; i < slot.firings.size(); ++i) {
      const auto& f = slot.firings[i];
      if (i) out << ',';
      out << f.channel.label() << ':' << f.amplitude.value << ':' << f.delay.value;
    }
    out << '\n';
  }
  return out.str();
}

PulsePlan parse_plan(std::string_view text, const ModulatorCalibration& cal) {
  PulsePlan plan;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    plan.slots.push_back(at_line(line, [&] {
      const auto parts = split(raw, '|');
      if (parts.size() != 3) throw std::invalid_argument("expected `index | symbol | firings`");
      SlotPlan slot;
      slot.index = static_cast<std::size_t>(parse_int(parts[0], "slot index"));
      slot.symbol = parse_symbol(parts[1]);
      const PulseTiming timing{static_cast<double>(slot.index) * cal.slot_period + cal.early_bin_start,
                               cal.bin_width};
      if (!parts[2].empty()) {
        for (auto item : split(parts[2], ',')) {
          const auto fields = split(item, ':');
          if (fields.size() != 3) throw std::invalid_argument("expected CH:amp:delay, got '" + std::string(item) + "'");
          const auto ch = ChannelId::from_label(fields[0]);
          if (!ch) throw std::invalid_argument("unknown channel '" + std::string(fields[0]) + "'");
          slot.firings.push_back(Firing{*ch, AmplitudeCode(parse_int(fields[1], "amplitude")),
                                        DelayCode(parse_int(fields[2], "delay")), timing});
        }
      }
      return slot;
    }));
  }
  return plan;
}

}
