#pragma once

#include <string>

#include "roomsense/types.hpp"

namespace roomsense {

// Reads a RIFF/WAVE file containing 16-bit PCM. Stereo is averaged to mono.
// Throws DataError for anything else (other codecs, truncated files).
AudioClip read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] before quantization.
void write_wav(const std::string& path, const AudioClip& clip);

} // namespace roomsense
