#pragma once

#include <string>
#include <vector>

namespace higrid {

struct WavData {
  double fs = 48000.0;
  std::vector<std::vector<double>> channels;  // planar
};

/// RIFF/WAVE reader; accepts IEEE float32 and PCM16.
WavData read_wav(const std::string& path);

/// Writes IEEE float32 interleaved.
void write_wav(const std::string& path, const WavData& data);

}  // namespace higrid
