#pragma once

#include <filesystem>

#include "pcgkit/types.hpp"

namespace pcgkit {

enum class WavEncoding { Pcm16, Float32 };

// Reads a mono RIFF/WAVE file (PCM16 or IEEE float32, plain or
// WAVE_FORMAT_EXTENSIBLE). PCM16 is scaled by 1/32768, so full-scale
// positive 32767 maps to 32767/32768.
// Throws ValidationError for unsupported encodings, multi-channel input and
// truncated files; IoError if the file cannot be opened.
Waveform load_wav(const std::filesystem::path& path);

// PCM16 output is clipped to [-1, 32767/32768] and rounded to nearest.
// The file is written atomically.
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace pcgkit
