#include "tonelab/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tonelab/fft.hpp"

namespace tonelab {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(
      v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// -log Wiener entropy of the median-filter residual of a band-power slice,
/// after shifting the residual so its minimum is exactly one.
double prominence_of_bands(const std::vector<double>& band_power) {
  const std::size_t n = band_power.size();
  if (n < 8) throw feature_error("peak_prominence: fewer than 8 bands");

  std::vector<double> residual(n);
  std::vector<double> window;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 4 ? i - 4 : 0;
    const std::size_t hi = std::min(n, i + 4);
    window.assign(band_power.begin() + static_cast<std::ptrdiff_t>(lo),
                  band_power.begin() + static_cast<std::ptrdiff_t>(hi));
    residual[i] = band_power[i] - median_of(std::move(window));
  }

  const double min_r = *std::min_element(residual.begin(), residual.end());
  double log_sum = 0.0, sum = 0.0;
  for (double r : residual) {
    const double v = r + (1.0 - min_r);
    log_sum += std::log(v);
    sum += v;
  }
  const double we =
      std::exp(log_sum / static_cast<double>(n)) / (sum / static_cast<double>(n));
  return -std::log(we);
}

void frame_ratios(const std::vector<double>& samples, std::size_t offset,
                  std::size_t len, const FrameConfig& cfg,
                  std::vector<double>& out) {
  for (std::size_t pos = 0; pos + cfg.frame_length <= len; pos += cfg.hop)
    out.push_back(
        harmonic_ratio_frame(samples.data() + offset + pos, cfg.frame_length));
}

}  // namespace

std::string FeatureConfig::config_key() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "v1|sr=%d|gate=%.9g@%.9g|frame=%zu/%zu|fmin=%.9g|phon=%.9g",
                sample_rate, gate_db, gate_frame, frames.frame_length,
                frames.hop, band_f_min, weight_phon);
  return buf;
}

double harmonic_ratio_frame(const double* frame, std::size_t len) {
  if (len == 0) throw feature_error("harmonic_ratio_frame: empty frame");
  std::vector<double> x(frame, frame + len);
  double mean = 0.0;
  for (double s : x) mean += s;
  mean /= static_cast<double>(len);
  for (double& s : x) s -= mean;

  double energy = 0.0;
  for (double s : x) energy += s * s;
  if (energy <= 0.0) throw feature_error("harmonic_ratio_frame: all-zero frame");

  // Unnormalized autocorrelation c(m) = sum_n x(n) x(n+m) via FFT.
  const std::size_t nfft = next_pow2(2 * len);
  auto spec = rfft(x, nfft);
  for (auto& c : spec) c = std::norm(c);
  const auto corr = irfft(spec, nfft);

  // Prefix sums of x^2 give the two lag-dependent normalization energies.
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

  const std::size_t max_lag = len / 2;
  double best = 0.0;
  bool crossed = false;
  double prev = 1.0;
  for (std::size_t m = 1; m <= max_lag; ++m) {
    const double head = prefix[len - m];                // sum over n = 0..len-m-1
    const double tail = prefix[len] - prefix[m];        // sum over n = m..len-1
    const double denom = std::sqrt(head * tail);
    const double r = denom > 0.0 ? corr[m] / denom : 0.0;
    if (!crossed && prev > 0.0 && r <= 0.0) crossed = true;
    if (crossed) best = std::max(best, r);
    prev = r;
  }
  if (!crossed) return 0.0;
  return std::clamp(best, 0.0, 1.0);
}

double harmonic_ratio_frame(const std::vector<double>& frame) {
  return harmonic_ratio_frame(frame.data(), frame.size());
}

double hr_inharmonicity(const AudioClip& clip, const FrameConfig& cfg) {
  if (cfg.hop == 0 || cfg.hop > cfg.frame_length)
    throw feature_error("hr_inharmonicity: invalid frame config");
  std::vector<double> ratios;
  frame_ratios(clip.samples, 0, clip.samples.size(), cfg, ratios);
  if (ratios.empty())
    throw feature_error("hr_inharmonicity: clip shorter than one frame");
  return 1.0 - median_of(std::move(ratios));
}

double hr_inharmonicity(const GateResult& gated, const FrameConfig& cfg) {
  if (cfg.hop == 0 || cfg.hop > cfg.frame_length)
    throw feature_error("hr_inharmonicity: invalid frame config");
  std::vector<double> ratios;
  for (const auto& [offset, len] : gated.runs())
    frame_ratios(gated.audio.samples, offset, len, cfg, ratios);
  if (ratios.empty())
    throw feature_error("hr_inharmonicity: no retained run fits one frame");
  return 1.0 - median_of(std::move(ratios));
}

double spectral_flatness(const BandSpectrum& bands) {
  if (bands.band_power.empty())
    throw feature_error("spectral_flatness: empty band spectrum");
  const double floor_v = std::numeric_limits<double>::epsilon();
  double log_sum = 0.0, sum = 0.0;
  for (double p : bands.band_power) {
    const double v = std::max(p, floor_v);
    log_sum += std::log(v);
    sum += v;
  }
  const double n = static_cast<double>(bands.band_power.size());
  return std::exp(log_sum / n) / (sum / n);
}

double peak_prominence(const AudioClip& clip, double f_min) {
  const auto bands =
      to_band_spectrum(power_spectrum(rms_normalize(clip)), f_min);
  return prominence_of_bands(bands.band_power);
}

double noisiness(const AudioClip& clip, double f_min) {
  return -peak_prominence(clip, f_min);
}

std::vector<double> band_noisiness(const AudioClip& clip,
                                   const std::vector<double>& band_edges) {
  if (band_edges.size() < 2 ||
      !std::is_sorted(band_edges.begin(), band_edges.end()))
    throw feature_error("band_noisiness: need >= 2 ascending edges");
  const auto bands = to_band_spectrum(power_spectrum(rms_normalize(clip)),
                                      band_edges.front());
  std::vector<double> out;
  for (std::size_t e = 0; e + 1 < band_edges.size(); ++e) {
    std::vector<double> slice;
    for (std::size_t b = 0; b < bands.band_centers.size(); ++b)
      if (bands.band_centers[b] >= band_edges[e] &&
          bands.band_centers[b] < band_edges[e + 1])
        slice.push_back(bands.band_power[b]);
    if (slice.size() < 8)
      throw feature_error("band_noisiness: band narrower than 8 log bands");
    out.push_back(-prominence_of_bands(slice));
  }
  return out;
}

TrackFeatures track_features(const AudioClip& clip, const WeightCurve& weights,
                             const FeatureConfig& cfg) {
  GateResult gated = gate(clip, cfg.gate_db, cfg.gate_frame);

  TrackFeatures f;
  f.hr_inharmonicity_raw = hr_inharmonicity(gated, cfg.frames);
  f.noisiness_raw = noisiness(gated.audio, cfg.band_f_min);

  GateResult weighted = gated;
  weighted.audio = apply_weighting(gated.audio, weights);
  f.hr_inharmonicity_weighted = hr_inharmonicity(weighted, cfg.frames);
  f.noisiness_weighted = noisiness(weighted.audio, cfg.band_f_min);
  return f;
}

}  // namespace tonelab
