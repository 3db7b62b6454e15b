#pragma once

#include <string>

#include "tonelab/audio.hpp"

namespace tonelab {

class wav_io_error : public audio_error {
 public:
  using audio_error::audio_error;
};

class wav_format_error : public audio_error {
 public:
  using audio_error::audio_error;
};

class wav_empty_error : public audio_error {
 public:
  using audio_error::audio_error;
};

/// Read a RIFF/WAVE file. Supported encodings: PCM 16/24-bit and IEEE
/// float 32-bit, 1 or 2 channels. Integer samples are scaled to +-1.0 full
/// scale. Throws wav_io_error (unreadable), wav_format_error (unsupported
/// encoding) or wav_empty_error (no audio data).
AudioClip load_audio(const std::string& path);

/// Write a clip as PCM 16-bit (bits=16) or IEEE float (bits=32).
void save_audio(const std::string& path, const AudioClip& clip, int bits = 16);

}  // namespace tonelab
