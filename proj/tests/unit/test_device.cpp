#include <doctest.h>

#include <charconv>
#include <set>
#include <string>

#include "pulsectl/device/channel.hpp"
#include "pulsectl/device/channel_map.hpp"
#include "pulsectl/device/codes.hpp"

using namespace pulsectl;

namespace {

// Decimal literal "c*0.05" parsed independently of the library's arithmetic.
double grid_literal(int code) {
  const int mv = code * 50;
  std::string s = std::to_string(mv / 1000) + "." + std::to_string(mv % 1000 / 100) +
                  std::to_string(mv % 100 / 10) + std::to_string(mv % 10);
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}

TEST_CASE("channel inventory: 12 outputs in five groups") {
  CHECK(ChannelId::all().size() == 12);
  CHECK(group_size(ChannelGroup::Chopper) == 2);
  CHECK(group_size(ChannelGroup::Decoy) == 4);
  CHECK(group_size(ChannelGroup::Normalization) == 2);
  CHECK(group_size(ChannelGroup::Phase) == 2);
  CHECK(group_size(ChannelGroup::Time) == 2);

  std::set<std::string> labels;
  for (auto id : ChannelId::all()) {
    labels.emplace(id.label());
    CHECK(ChannelId::from_label(id.label()) == id);
    CHECK(ChannelId::from_wire(id.wire_index()) == id);
  }
  CHECK(labels.size() == 12);
  CHECK(channels::AD3().group() == ChannelGroup::Decoy);
  CHECK(channels::AD3().index_in_group() == 3);
  CHECK(channels::AT2().label() == "AT2");
  CHECK_THROWS_AS(ChannelId::from_wire(12), std::out_of_range);
  CHECK_THROWS_AS(ChannelId::from_wire(-1), std::out_of_range);
  CHECK_FALSE(ChannelId::from_label("AX1").has_value());
}

TEST_CASE("amplitude codes") {
  CHECK(amplitude_code_to_volts(AmplitudeCode(0)) == 0.0);
  CHECK(amplitude_code_to_volts(AmplitudeCode(120)) == 6.0);
  CHECK(amplitude_code_to_volts(AmplitudeCode(37)) == 1.85);
  CHECK(amplitude_code_to_millivolts(AmplitudeCode(37)) == 1850);

  for (int c = 0; c <= 120; ++c) {
    CAPTURE(c);
    CHECK(amplitude_code_to_volts(AmplitudeCode(c)) == grid_literal(c));
    CHECK(volts_to_amplitude_code(amplitude_code_to_volts(AmplitudeCode(c))).value == c);
  }

  CHECK(volts_to_amplitude_code(1.850).value == 37);
  CHECK(volts_to_amplitude_code(1.874).value == 37);
  CHECK(volts_to_amplitude_code(1.876).value == 38);
  CHECK(volts_to_amplitude_code(1.875).value == 38);
  CHECK(volts_to_amplitude_code(0.0).value == 0);
  CHECK(volts_to_amplitude_code(6.0).value == 120);
  CHECK_THROWS_AS(volts_to_amplitude_code(6.2), RangeError);
  CHECK_THROWS_AS(volts_to_amplitude_code(-0.1), RangeError);
  CHECK_THROWS_AS(amplitude_code_to_volts(AmplitudeCode(121)), RangeError);
}

TEST_CASE("delay codes") {
  CHECK(delay_code_to_seconds(DelayCode(-150)) == doctest::Approx(-15.0e-9).epsilon(1e-15));
  CHECK(delay_code_to_seconds(DelayCode(0)) == 0.0);
  CHECK(delay_code_to_seconds(DelayCode(37)) == doctest::Approx(3.7e-9).epsilon(1e-15));
  for (int c = -150; c <= 150; ++c) CHECK(delay_code_to_picoseconds(DelayCode(c)) == 100 * c);
  CHECK_THROWS_AS(delay_code_to_seconds(DelayCode(151)), RangeError);
  CHECK_THROWS_AS(delay_code_to_picoseconds(DelayCode(-151)), RangeError);
}

TEST_CASE("validate_settings") {
  CHECK(validate_settings({channels::AC1(), AmplitudeCode(120), DelayCode(0), true}).empty());

  auto amp = validate_settings({channels::AD3(), AmplitudeCode(121), DelayCode(0), true});
  REQUIRE(amp.size() == 1);
  CHECK(amp[0].field == SettingsField::Amplitude);

  auto delay = validate_settings({channels::AT2(), AmplitudeCode(0), DelayCode(-151), false});
  REQUIRE(delay.size() == 1);
  CHECK(delay[0].field == SettingsField::Delay);

  CHECK(validate_settings({channels::AT2(), AmplitudeCode(-1), DelayCode(400), false}).size() == 2);
}

TEST_CASE("channel map file") {
  const auto file = ChannelMap::load(PULSECTL_CHANNEL_MAP);
  const auto canonical = ChannelMap::canonical();
  for (auto id : ChannelId::all()) {
    CHECK(file.resolve(id.label()) == id);
    CHECK(file.wire_index(id) == canonical.wire_index(id));
    CHECK(file.entry(id).group == id.group());
  }
  CHECK(ChannelMap::parse(canonical.to_text()).to_text() == canonical.to_text());
}

TEST_CASE("channel map errors carry the line number") {
  const std::string good = ChannelMap::canonical().to_text();

  auto line_of = [](const std::string& text) {
    try {
      ChannelMap::parse(text);
    } catch (const ChannelMapError& e) {
      return e.line();
    }
    return -1;
  };

  std::string dup_index = good;
  dup_index.replace(dup_index.find("AC2 = 1"), 7, "AC2 = 0");
  CHECK(line_of(dup_index) > 0);

  std::string wrong_group = good;
  wrong_group.replace(wrong_group.find("AD1 = 2, decoy"), 14, "AD1 = 2, phase");
  CHECK(line_of(wrong_group) > 0);

  CHECK(line_of(good + "ZZ9 = 3, time\n") > 0);
  CHECK(line_of("AC1 = 0, chopper\n") == 0);
  CHECK(line_of("AC1 0 chopper\n") == 1);
  CHECK(line_of(good) == -1);
}
