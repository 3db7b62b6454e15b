#pragma once

#include <vector>

#include "tonelab/audio.hpp"

namespace tonelab {

/// Equal-loudness contour sampled at the 29 standard support frequencies
/// (20 Hz to 12.5 kHz).
struct LoudnessContour {
  double phon_level = 50.0;
  std::vector<double> freqs;
  std::vector<double> spl;  // dB SPL per support frequency
};

/// Linear gain curve derived from a loudness contour, unity at 1 kHz.
/// Between support points the gain is interpolated linearly in dB over log
/// frequency; outside [20 Hz, 12.5 kHz] the boundary value is held.
struct WeightCurve {
  std::vector<double> freqs;
  std::vector<double> linear_gain;

  double gain_at(double freq_hz) const;
};

/// ISO 226:2003 equal-loudness contour from the standard's closed-form
/// parameterization. Valid for 0 <= phon <= 90.
LoudnessContour iso226_contour(double phon = 50.0);

WeightCurve contour_to_weights(const LoudnessContour& contour);

/// Zero-phase weighting: whole-signal transform, per-bin amplitude scaling by
/// the interpolated gain, inverse transform. Output length equals input
/// length. Expects a prepared (mono) clip.
AudioClip apply_weighting(const AudioClip& clip, const WeightCurve& weights);

}  // namespace tonelab
