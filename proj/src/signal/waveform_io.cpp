#include "pulsectl/signal/waveform_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

namespace pulsectl {

namespace {

constexpr char magic[4] = {'P', 'C', 'W', 'F'};
constexpr uint16_t binary_version = 1;
constexpr std::string_view csv_tag = "# pulsectl-waveform v1";

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view text, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw WaveformFormatError(std::string("bad ") + what + " value '" + std::string(text) + "'");
  return v;
}

std::string_view header_value(const std::string& line, std::string_view key) {
  const std::string prefix = "# " + std::string(key) + "=";
  if (line.rfind(prefix, 0) != 0) throw WaveformFormatError("expected header '" + prefix + "...'");
  return std::string_view(line).substr(prefix.size());
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

class Reader {
  public:
    explicit Reader(const std::vector<uint8_t>& bytes): bytes_(bytes) {}

    void need(std::size_t n) const {
      if (bytes_.size() - pos_ < n) throw WaveformFormatError("binary waveform truncated");
    }
    uint16_t u16() {
      need(2);
      uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
      pos_ += 2;
      return v;
    }
    uint64_t u64() {
      need(8);
      uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
      pos_ += 8;
      return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    void skip(std::size_t n) {
      need(n);
      pos_ += n;
    }

  private:
    const std::vector<uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}

void write_waveform_csv(std::ostream& out, const Waveform& w) {
  out << csv_tag << '\n'
      << "# sample_rate=" << shortest(w.sample_rate()) << '\n'
      << "# t0=" << shortest(w.t0()) << '\n'
      << "# count=" << w.size() << '\n';
  if (w.load_ohms()) out << "# load_ohms=" << shortest(*w.load_ohms()) << '\n';
  out << "time_s,volts\n";
  for (std::size_t n = 0; n < w.size(); ++n) out << shortest(w.time_at(n)) << ',' << shortest(w[n]) << '\n';
}

Waveform read_waveform_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_tag) throw WaveformFormatError("missing waveform format tag");
  std::getline(in, line);
  const double rate = parse_double(header_value(line, "sample_rate"), "sample_rate");
  std::getline(in, line);
  const double t0 = parse_double(header_value(line, "t0"), "t0");
  std::getline(in, line);
  const auto count_text = header_value(line, "count");
  std::size_t count = 0;
  if (auto [p, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
      ec != std::errc() || p != count_text.data() + count_text.size())
    throw WaveformFormatError("bad count value");

  std::optional<double> load;
  std::getline(in, line);
  if (line.rfind("# load_ohms=", 0) == 0) {
    load = parse_double(header_value(line, "load_ohms"), "load_ohms");
    std::getline(in, line);
  }
  if (line != "time_s,volts") throw WaveformFormatError("missing 'time_s,volts' column header");

  std::vector<double> samples;
  samples.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw WaveformFormatError("row without a comma: " + line);
    samples.push_back(parse_double(std::string_view(line).substr(comma + 1), "volts"));
  }
  if (samples.size() != count)
    throw WaveformFormatError("header count " + std::to_string(count) + " but " +
                              std::to_string(samples.size()) + " rows");
  return Waveform(rate, t0, std::move(samples), load);
}

std::vector<uint8_t> encode_waveform_binary(const Waveform& w) {
  std::vector<uint8_t> out(std::begin(magic), std::end(magic));
  put_u16(out, binary_version);
  put_u16(out, w.load_ohms() ? 1 : 0);
  put_f64(out, w.sample_rate());
  put_f64(out, w.t0());
  put_u64(out, w.size());
  if (w.load_ohms()) put_f64(out, *w.load_ohms());
  out.reserve(out.size() + 8 * w.size());
  for (double v : w.samples()) put_f64(out, v);
  return out;
}

Waveform decode_waveform_binary(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw WaveformFormatError("missing PCWF magic");
  Reader r(bytes);
  r.skip(4);
  if (r.u16() != binary_version) throw WaveformFormatError("unsupported binary waveform version");
  const uint16_t flags = r.u16();
  const double rate = r.f64();
  const double t0 = r.f64();
  const uint64_t count = r.u64();
  std::optional<double> load;
  if (flags & 1) load = r.f64();
  if (r.remaining() != count * 8)
    throw WaveformFormatError("binary waveform sample block does not match count");
  std::vector<double> samples(count);
  for (auto& v : samples) v = r.f64();
  return Waveform(rate, t0, std::move(samples), load);
}

void save_waveform(const std::filesystem::path& path, const Waveform& w, WaveformEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WaveformFormatError("cannot write " + path.string());
  if (encoding == WaveformEncoding::Csv) {
    write_waveform_csv(out, w);
  } else {
    const auto bytes = encode_waveform_binary(w);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw WaveformFormatError("write failed for " + path.string());
}

Waveform load_waveform(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WaveformFormatError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), magic, 4) == 0) return decode_waveform_binary(bytes);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream stream(text);
  return read_waveform_csv(stream);
}

WaveformEncoding encoding_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".pcwf") ? WaveformEncoding::Binary : WaveformEncoding::Csv;
}

}
