#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "flutekit/error.hpp"
#include "flutekit/ingest.hpp"

namespace flutekit {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

AudioBuffer decode_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw_input("audio: not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::string_view data;
  bool have_fmt = false, have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const std::size_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, b.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw_input("audio: truncated fmt chunk");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw_input("audio: truncated extensible fmt chunk");
        format = read_u16(b, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = b.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw_input("audio: missing fmt or data chunk");
  if (channels == 0 || rate == 0) throw_input("audio: invalid channel count or rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw_input(fmt::format("audio: unsupported codec (format {}, {} bits)", format, bits));

  const std::size_t bytes_per_frame = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data.size() / bytes_per_frame;
  if (frames == 0) throw_input("audio: zero-length audio");

  AudioBuffer audio;
  audio.rate = rate;
  audio.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = f * bytes_per_frame + c * (bits / 8);
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(data, at);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        acc += v;
      }
    }
    const double mono = acc / channels;
    if (!std::isfinite(mono)) throw_input(fmt::format("audio: non-finite sample at frame {}", f));
    audio.samples[f] = mono;
  }
  return audio;
}

std::string encode_wav_pcm16(const AudioBuffer& audio) {
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.rate));
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : audio.samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(c * 32767.0, -32768.0, 32767.0)));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

}  // namespace flutekit
