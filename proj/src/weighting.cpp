#include "tonelab/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tonelab/fft.hpp"

namespace tonelab {

namespace {

// ISO 226:2003 table 1: support frequency, exponent alpha_f, magnitude of the
// linear transfer function L_U, and threshold of hearing T_f.
constexpr int kNumFreqs = 29;
constexpr double kFreq[kNumFreqs] = {
    20,   25,   31.5, 40,   50,   63,   80,   100,  125,  160,
    200,  250,  315,  400,  500,  630,  800,  1000, 1250, 1600,
    2000, 2500, 3150, 4000, 5000, 6300, 8000, 10000, 12500};
constexpr double kAlpha[kNumFreqs] = {
    0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349, 0.330,
    0.315, 0.301, 0.288, 0.276, 0.267, 0.259, 0.253, 0.250, 0.246, 0.244,
    0.243, 0.243, 0.243, 0.242, 0.242, 0.245, 0.254, 0.271, 0.301};
constexpr double kLu[kNumFreqs] = {
    -31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2, -4.5,
    -3.1,  -2.0,  -1.1,  -0.4,  0.0,   0.3,   0.5,   0.0,  -2.7, -4.1,
    -1.0,  1.7,   2.5,   1.2,   -2.1,  -7.1,  -11.2, -10.7, -3.1};
constexpr double kTf[kNumFreqs] = {
    78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9,
    14.4, 11.4, 8.6,  6.2,  4.4,  3.0,  2.2,  2.4,  3.5,  1.7,
    -1.3, -4.2, -6.0, -5.4, -1.5, 6.0,  12.6, 13.9, 12.3};

}  // namespace

LoudnessContour iso226_contour(double phon) {
  if (!(phon >= 0.0 && phon <= 90.0))
    throw std::invalid_argument("iso226_contour: phon outside [0, 90]");
  LoudnessContour c;
  c.phon_level = phon;
  c.freqs.assign(kFreq, kFreq + kNumFreqs);
  c.spl.resize(kNumFreqs);
  for (int i = 0; i < kNumFreqs; ++i) {
    const double af =
        4.47e-3 * (std::pow(10.0, 0.025 * phon) - 1.15) +
        std::pow(0.4 * std::pow(10.0, (kTf[i] + kLu[i]) / 10.0 - 9.0), kAlpha[i]);
    c.spl[i] = 10.0 / kAlpha[i] * std::log10(af) - kLu[i] + 94.0;
  }
  return c;
}

WeightCurve contour_to_weights(const LoudnessContour& contour) {
  if (contour.freqs.size() != contour.spl.size() || contour.freqs.empty())
    throw std::invalid_argument("contour_to_weights: malformed contour");
  const auto anchor = std::find(contour.freqs.begin(), contour.freqs.end(), 1000.0);
  if (anchor == contour.freqs.end())
    throw std::invalid_argument("contour_to_weights: contour lacks 1 kHz point");
  const double spl_1k = contour.spl[static_cast<std::size_t>(
      anchor - contour.freqs.begin())];

  WeightCurve w;
  w.freqs = contour.freqs;
  w.linear_gain.resize(contour.spl.size());
  for (std::size_t i = 0; i < contour.spl.size(); ++i)
    w.linear_gain[i] = std::pow(10.0, (spl_1k - contour.spl[i]) / 20.0);
  return w;
}

double WeightCurve::gain_at(double freq_hz) const {
  if (freq_hz <= freqs.front()) return linear_gain.front();
  if (freq_hz >= freqs.back()) return linear_gain.back();
  const auto it = std::upper_bound(freqs.begin(), freqs.end(), freq_hz);
  const std::size_t hi = static_cast<std::size_t>(it - freqs.begin());
  const std::size_t lo = hi - 1;
  const double t = (std::log(freq_hz) - std::log(freqs[lo])) /
                   (std::log(freqs[hi]) - std::log(freqs[lo]));
  const double db_lo = 20.0 * std::log10(linear_gain[lo]);
  const double db_hi = 20.0 * std::log10(linear_gain[hi]);
  return std::pow(10.0, ((1.0 - t) * db_lo + t * db_hi) / 20.0);
}

AudioClip apply_weighting(const AudioClip& clip, const WeightCurve& weights) {
  if (clip.samples.empty()) throw audio_error("apply_weighting: empty clip");
  if (clip.channels != 1) throw audio_error("apply_weighting: expected mono clip");
  const std::size_t n = clip.samples.size();
  auto spec = rfft(clip.samples);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * clip.sample_rate /
                     static_cast<double>(n);
    spec[k] *= weights.gain_at(f);
  }
  AudioClip out = clip;
  out.samples = irfft(spec, n);
  return out;
}

}  // namespace tonelab
