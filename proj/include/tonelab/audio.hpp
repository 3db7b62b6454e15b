#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tonelab {

/// Sampled waveform. Samples are nominal full scale (+-1.0); stereo clips
/// store interleaved frames.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 22050;
  int channels = 1;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
};

/// One-sided power spectrum, normalized so that the sum of `power` equals the
/// mean square of the analyzed signal.
struct Spectrum {
  std::vector<double> bin_freqs;
  std::vector<double> power;
};

/// Power spectrum aggregated onto a logarithmic grid with 25-cent band
/// spacing (consecutive centers differ by a factor 2^(25/1200)).
struct BandSpectrum {
  std::vector<double> band_centers;
  std::vector<double> band_power;
  double f_min = 0.0;
  double f_max = 0.0;
};

/// RMS power per non-overlapping window.
struct Envelope {
  std::vector<double> values;
  double window_duration = 0.0;
  double hop_duration = 0.0;
};

/// Output of gate(): concatenated retained frames plus the index list needed
/// by frame-wise consumers.
struct GateResult {
  AudioClip audio;
  std::vector<std::size_t> retained;
  std::size_t frame_samples = 0;

  /// Contiguous retained stretches as (offset, length) pairs addressing
  /// `audio.samples`. Frame-based analyses stay inside a run so they never
  /// straddle a concatenation seam.
  std::vector<std::pair<std::size_t, std::size_t>> runs() const;
};

class audio_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class gate_error : public audio_error {
 public:
  using audio_error::audio_error;
};

/// Mono downmix (channel mean) followed by band-limited resampling to
/// target_rate. A mono clip already at target_rate is returned unchanged.
AudioClip prepare(const AudioClip& clip, int target_rate = 22050);

/// Scale so that max |sample| == 1. Throws audio_error on all-zero input.
AudioClip peak_normalize(const AudioClip& clip);

/// Scale so that the RMS power equals 1. Throws audio_error on all-zero input.
AudioClip rms_normalize(const AudioClip& clip);

/// Peak-normalize, split into non-overlapping frames of frame_duration
/// seconds, drop frames whose RMS (dB re full scale) is below threshold_db
/// (inclusive threshold), and concatenate what is left. Throws gate_error
/// when no frame passes.
GateResult gate(const AudioClip& clip, double threshold_db = -20.0,
                double frame_duration = 0.1);

/// Single transform over the whole clip, squared magnitude, one-sided.
Spectrum power_spectrum(const AudioClip& clip);

/// Number of 25-cent bands spanning [f_min, f_max).
std::size_t band_count(double f_min, double f_max);

/// Aggregate FFT bins onto the 25-cent log grid. Band value is the arithmetic
/// mean of the power of bins falling inside the band edges; empty bands are
/// filled by linear interpolation between nonempty neighbours.
BandSpectrum to_band_spectrum(const Spectrum& spec, double f_min = 27.5,
                              double f_max = 0.0 /* 0 = Nyquist */);

/// RMS per window of `window` seconds taken every `hop` seconds (hop = 0
/// means non-overlapping windows).
Envelope envelope(const AudioClip& clip, double window = 0.05,
                  double hop = 0.0);

}  // namespace tonelab
