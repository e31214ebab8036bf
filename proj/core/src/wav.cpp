#include "pcgkit/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"

namespace pcgkit {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::string& data, std::size_t offset) {
  T value;
  std::memcpy(&value, data.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void append_le(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::string name = path.string();
  if (data.size() < 12 || data.compare(0, 4, "RIFF") != 0 || data.compare(8, 4, "WAVE") != 0) {
    throw ValidationError(name + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::string id = data.substr(pos, 4);
    const std::uint32_t size = read_le<std::uint32_t>(data, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > data.size()) throw ValidationError(name + ": truncated fmt chunk");
      format = read_le<std::uint16_t>(data, body);
      channels = read_le<std::uint16_t>(data, body + 2);
      rate = read_le<std::uint32_t>(data, body + 4);
      bits = read_le<std::uint16_t>(data, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw ValidationError(name + ": truncated extensible fmt chunk");
        // First two bytes of the SubFormat GUID carry the actual format tag.
        format = read_le<std::uint16_t>(data, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ValidationError(name + ": data chunk before fmt chunk");
      if (channels != 1) {
        throw ValidationError(name + ": " + std::to_string(channels) +
                              " channels; only mono input is supported");
      }
      if (rate == 0) throw ValidationError(name + ": zero sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32) {
        throw ValidationError(name + ": unsupported encoding (format " + std::to_string(format) +
                              ", " + std::to_string(bits) + " bits); expected PCM16 or float32");
      }
      if (body + size > data.size()) throw ValidationError(name + ": truncated data chunk");
      const std::size_t width = bits / 8;
      if (size % width != 0) throw ValidationError(name + ": data size not a multiple of sample width");
      Waveform wave;
      wave.sample_rate = static_cast<int>(rate);
      wave.samples.resize(size / width);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        if (pcm16) {
          wave.samples[i] = read_le<std::int16_t>(data, body + 2 * i) / 32768.0;
        } else {
          const float v = read_le<float>(data, body + 4 * i);
          if (!std::isfinite(v)) throw ValidationError(name + ": non-finite sample");
          wave.samples[i] = v;
        }
      }
      return wave;
    }
    pos = body + size + (size & 1u);
  }
  throw ValidationError(name + ": missing " + (have_fmt ? "data" : "fmt") + " chunk (truncated file?)");
}

void write_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  if (wave.sample_rate <= 0) throw ValidationError("write_wav: non-positive sample rate");
  const bool pcm16 = encoding == WavEncoding::Pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(wave.samples.size() * block);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  append_le<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  append_le<std::uint32_t>(out, 16);
  append_le<std::uint16_t>(out, pcm16 ? kFormatPcm : kFormatFloat);
  append_le<std::uint16_t>(out, 1);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate) * block);
  append_le<std::uint16_t>(out, block);
  append_le<std::uint16_t>(out, bits);
  out += "data";
  append_le<std::uint32_t>(out, data_size);
  for (double v : wave.samples) {
    if (pcm16) {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      append_le<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      append_le<float>(out, static_cast<float>(v));
    }
  }
  atomic_write_file(path, out);
}

}  // namespace pcgkit
