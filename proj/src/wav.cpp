#include "higrid/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace higrid {
namespace {

template <typename T>
T read_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw std::runtime_error("wav: truncated file");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

float bits_to_float(std::uint32_t u) {
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

std::uint32_t float_to_bits(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  return u;
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("wav: cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("wav: not a RIFF file");
  read_le<std::uint32_t>(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("wav: not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<char> data;
  bool have_fmt = false, have_data = false;
  while (in.read(tag, 4)) {
    std::uint32_t size = read_le<std::uint32_t>(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(in);
      channels = read_le<std::uint16_t>(in);
      rate = read_le<std::uint32_t>(in);
      read_le<std::uint32_t>(in);  // byte rate
      read_le<std::uint16_t>(in);  // block align
      bits = read_le<std::uint16_t>(in);
      if (size > 16) in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(size);
      in.read(data.data(), size);
      if (!in) throw std::runtime_error("wav: truncated data chunk");
      have_data = true;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  if (!have_fmt || !have_data) throw std::runtime_error("wav: missing fmt or data chunk");
  if (channels == 0) throw std::runtime_error("wav: zero channels");

  WavData wav;
  wav.fs = rate;
  wav.channels.resize(channels);
  if (format == 3 && bits == 32) {
    const std::size_t frames = data.size() / (4 * channels);
    for (auto& ch : wav.channels) ch.resize(frames);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t f = 0; f < frames; ++f)
      for (std::uint16_t c = 0; c < channels; ++c) {
        std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
        wav.channels[c][f] = bits_to_float(u);
        p += 4;
      }
  } else if (format == 1 && bits == 16) {
    const std::size_t frames = data.size() / (2 * channels);
    for (auto& ch : wav.channels) ch.resize(frames);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t f = 0; f < frames; ++f)
      for (std::uint16_t c = 0; c < channels; ++c) {
        std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        wav.channels[c][f] = v / 32768.0;
        p += 2;
      }
  } else {
    throw std::runtime_error("wav: unsupported format (want float32 or PCM16)");
  }
  return wav;
}

void write_wav(const std::string& path, const WavData& data) {
  if (data.channels.empty()) throw std::invalid_argument("wav: no channels");
  const std::size_t frames = data.channels.front().size();
  for (const auto& ch : data.channels)
    if (ch.size() != frames) throw std::invalid_argument("wav: channel lengths differ");

  const std::uint16_t channels = static_cast<std::uint16_t>(data.channels.size());
  const std::uint32_t rate = static_cast<std::uint32_t>(data.fs);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * channels * 4);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("wav: cannot write " + path);
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 4 + 26 + 12 + 8 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 18);
  write_le<std::uint16_t>(out, 3);  // IEEE float
  write_le<std::uint16_t>(out, channels);
  write_le<std::uint32_t>(out, rate);
  write_le<std::uint32_t>(out, rate * channels * 4);
  write_le<std::uint16_t>(out, channels * 4);
  write_le<std::uint16_t>(out, 32);
  write_le<std::uint16_t>(out, 0);  // cbSize
  out.write("fact", 4);
  write_le<std::uint32_t>(out, 4);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_size);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::uint16_t c = 0; c < channels; ++c)
      write_le<std::uint32_t>(out, float_to_bits(static_cast<float>(data.channels[c][f])));
  if (!out) throw std::runtime_error("wav: short write to " + path);
}

}  // namespace higrid
