#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tonelab/audio.hpp"
#include "tonelab/weighting.hpp"

namespace tonelab {

/// Framing for the autocorrelation-based harmonicity measure. The default
/// frame (2048 samples, ~93 ms at 22050 Hz) admits lags covering fundamentals
/// down to ~22 Hz; frames are rectangular with per-frame DC removal.
struct FrameConfig {
  std::size_t frame_length = 2048;
  std::size_t hop = 1024;
};

/// Per-track feature vector, raw and loudness-weighted, with the projected
/// coordinates filled in by the stats layer.
struct TrackFeatures {
  double hr_inharmonicity_raw = 0.0;
  double noisiness_raw = 0.0;
  double hr_inharmonicity_weighted = 0.0;
  double noisiness_weighted = 0.0;
  std::optional<double> pc1;
  std::optional<double> pc2;
};

/// Everything that affects a feature value, packaged so the cache can key on
/// it. config_key() renders a canonical string.
struct FeatureConfig {
  int sample_rate = 22050;
  double gate_db = -20.0;
  double gate_frame = 0.1;
  FrameConfig frames;
  double band_f_min = 27.5;
  double weight_phon = 50.0;

  std::string config_key() const;
};

class feature_error : public audio_error {
 public:
  using audio_error::audio_error;
};

/// Maximum of the normalized autocorrelation after its first zero-crossing,
/// over lags 1..len/2, clamped to [0, 1]. Returns 0 when the autocorrelation
/// never changes sign. The frame is DC-removed internally.
double harmonic_ratio_frame(const double* frame, std::size_t len);
double harmonic_ratio_frame(const std::vector<double>& frame);

/// 1 - median(per-frame harmonic ratio). Frames are taken at cfg.hop spacing
/// over the whole clip.
double hr_inharmonicity(const AudioClip& clip, const FrameConfig& cfg = {});

/// Same, but frames are confined to the contiguous runs of a gated clip so no
/// frame straddles a concatenation seam.
double hr_inharmonicity(const GateResult& gated, const FrameConfig& cfg = {});

/// Geometric mean / arithmetic mean of the band powers (machine-epsilon
/// floored).
double spectral_flatness(const BandSpectrum& bands);

/// Peakiness of the 25-cent band spectrum: residual against an 8-band sliding
/// median, shifted so its minimum is one, then -log of its Wiener entropy.
/// Zero for flat (noise-like) spectra, large and positive for peaked ones.
double peak_prominence(const AudioClip& clip, double f_min = 27.5);

/// -peak_prominence: noise scores near zero, tonal content strongly negative.
double noisiness(const AudioClip& clip, double f_min = 27.5);

/// Noisiness evaluated on the band spectrum restricted to each
/// [edge_i, edge_{i+1}) slice. Throws feature_error when a slice spans fewer
/// than 8 log bands.
std::vector<double> band_noisiness(const AudioClip& clip,
                                   const std::vector<double>& band_edges);

/// Full per-track pipeline: gate once, compute both features on the gated
/// audio and on its loudness-weighted copy.
TrackFeatures track_features(const AudioClip& clip, const WeightCurve& weights,
                             const FeatureConfig& cfg = {});

}  // namespace tonelab
