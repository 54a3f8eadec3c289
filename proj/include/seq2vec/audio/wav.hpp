#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seq2vec/error.hpp"

namespace seq2vec::audio {

/// Mono PCM audio with samples in [-1, 1).
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

enum class WavErrorCode {
  MalformedHeader,
  UnsupportedEncoding,
  UnsupportedChannels,
  UnsupportedBitDepth,
  UnsupportedSampleRate,
};

class WavError : public FormatError {
public:
  WavError(WavErrorCode code, const std::string& what) : FormatError("wav: " + what), code_(code) {}
  WavErrorCode code() const noexcept { return code_; }

private:
  WavErrorCode code_;
};

inline constexpr int kDefaultSampleRate = 16000;

namespace detail {

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

inline std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace detail

/// Decodes a RIFF/WAVE PCM16 mono stream. Unless expected_rate is empty,
/// any other sample rate is rejected.
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes,
                            std::optional<int> expected_rate = kDefaultSampleRate) {
  using detail::read_u16;
  using detail::read_u32;
  if (bytes.size() < 12 || !detail::tag_is(bytes, 0, "RIFF") || !detail::tag_is(bytes, 8, "WAVE"))
    throw WavError(WavErrorCode::MalformedHeader, "missing RIFF/WAVE signature");

  std::optional<std::size_t> fmt_at, data_at;
  std::uint32_t fmt_size = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    if (size > bytes.size() - pos - 8) {
      // A truncated final data chunk is common in the wild; anything else is corrupt.
      if (!detail::tag_is(bytes, pos, "data")) throw WavError(WavErrorCode::MalformedHeader, "chunk extends past end of file");
    }
    if (detail::tag_is(bytes, pos, "fmt ")) {
      fmt_at = pos + 8;
      fmt_size = size;
    } else if (detail::tag_is(bytes, pos, "data")) {
      data_at = pos + 8;
      data_size = static_cast<std::uint32_t>(std::min<std::size_t>(size, bytes.size() - pos - 8));
      break;
    }
    pos += 8 + static_cast<std::size_t>(size) + (size & 1u);
  }
  if (!fmt_at || fmt_size < 16) throw WavError(WavErrorCode::MalformedHeader, "missing or short fmt chunk");
  if (!data_at) throw WavError(WavErrorCode::MalformedHeader, "missing data chunk");

  const std::uint16_t format = read_u16(bytes, *fmt_at);
  const std::uint16_t channels = read_u16(bytes, *fmt_at + 2);
  const std::uint32_t rate = read_u32(bytes, *fmt_at + 4);
  const std::uint16_t bits = read_u16(bytes, *fmt_at + 14);
  if (format != 1) throw WavError(WavErrorCode::UnsupportedEncoding, "only PCM (format 1) is supported, got " + std::to_string(format));
  if (channels != 1) throw WavError(WavErrorCode::UnsupportedChannels, "only mono is supported, got " + std::to_string(channels) + " channels");
  if (bits != 16) throw WavError(WavErrorCode::UnsupportedBitDepth, "only 16-bit samples are supported, got " + std::to_string(bits));
  if (rate == 0 || rate > 1'000'000) throw WavError(WavErrorCode::MalformedHeader, "invalid sample rate");
  if (expected_rate && static_cast<int>(rate) != *expected_rate)
    throw WavError(WavErrorCode::UnsupportedSampleRate,
                   "sample rate " + std::to_string(rate) + " Hz, expected " + std::to_string(*expected_rate));

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  const std::size_t count = data_size / 2;
  clip.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(bytes, *data_at + 2 * i));
    clip.samples[i] = static_cast<double>(raw) / 32768.0;
  }
  return clip;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline AudioClip load_wav(const std::string& path, std::optional<int> expected_rate = kDefaultSampleRate) {
  const auto bytes = read_file(path);
  return decode_wav(bytes, expected_rate);
}

/// Encodes raw PCM16 samples as a canonical 44-byte-header WAV file.
inline std::vector<std::uint8_t> encode_wav_pcm16(std::span<const std::int16_t> pcm, int sample_rate) {
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * pcm.size());
  const auto data_bytes = static_cast<std::uint32_t>(2 * pcm.size());
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_bytes);
  for (std::int16_t s : pcm) detail::put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

/// Rounds to the nearest PCM16 code, clamping to the representable range.
inline std::int16_t to_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

}  // namespace seq2vec::audio
