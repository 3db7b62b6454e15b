#include "tonelab/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tonelab/fft.hpp"

namespace tonelab {

namespace {

double peak_abs(const std::vector<double>& v) {
  double p = 0.0;
  for (double s : v) p = std::max(p, std::abs(s));
  return p;
}

double mean_square(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> GateResult::runs() const {
  // All retained frames are frame_samples long except, possibly, the final
  // one (the original clip's tail).
  const std::size_t total = audio.samples.size();
  auto frame_len = [&](std::size_t pos) {
    return pos + 1 == retained.size() ? total - pos * frame_samples
                                      : frame_samples;
  };
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t offset = 0;
  std::size_t i = 0;
  while (i < retained.size()) {
    std::size_t len = 0;
    std::size_t j = i;
    len += frame_len(j);
    while (j + 1 < retained.size() && retained[j + 1] == retained[j] + 1) {
      ++j;
      len += frame_len(j);
    }
    out.emplace_back(offset, len);
    offset += len;
    i = j + 1;
  }
  return out;
}

AudioClip prepare(const AudioClip& clip, int target_rate) {
  if (clip.samples.empty()) throw audio_error("prepare: empty clip");
  if (clip.sample_rate <= 0) throw audio_error("prepare: invalid sample rate");
  if (clip.channels != 1 && clip.channels != 2)
    throw audio_error("prepare: unsupported channel count");

  AudioClip mono;
  mono.sample_rate = clip.sample_rate;
  mono.channels = 1;
  if (clip.channels == 1) {
    mono.samples = clip.samples;
  } else {
    const std::size_t n = clip.frames();
    mono.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      mono.samples[i] = 0.5 * (clip.samples[2 * i] + clip.samples[2 * i + 1]);
  }
  if (mono.sample_rate == target_rate) return mono;

  // Band-limited rate conversion through the frequency domain: truncate or
  // zero-pad the one-sided spectrum to the new length.
  const std::size_t n = mono.samples.size();
  const std::size_t m = static_cast<std::size_t>(std::llround(
      static_cast<double>(n) * target_rate / mono.sample_rate));
  if (m == 0) throw audio_error("prepare: clip too short to resample");
  auto spec = rfft(mono.samples);
  std::vector<std::complex<double>> target(m / 2 + 1, 0.0);
  const std::size_t keep = std::min(spec.size(), target.size());
  std::copy(spec.begin(), spec.begin() + static_cast<std::ptrdiff_t>(keep),
            target.begin());
  if (m % 2 == 0 && keep == target.size() && keep < spec.size())
    target.back() = target.back().real();  // shared Nyquist bin must stay real
  auto resampled = irfft(target, m);
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (double& s : resampled) s *= scale;

  AudioClip out;
  out.samples = std::move(resampled);
  out.sample_rate = target_rate;
  out.channels = 1;
  return out;
}

AudioClip peak_normalize(const AudioClip& clip) {
  const double p = peak_abs(clip.samples);
  if (p <= 0.0) throw audio_error("peak_normalize: all-zero input");
  AudioClip out = clip;
  for (double& s : out.samples) s /= p;
  return out;
}

AudioClip rms_normalize(const AudioClip& clip) {
  const double ms = mean_square(clip.samples);
  if (ms <= 0.0) throw audio_error("rms_normalize: all-zero input");
  const double scale = 1.0 / std::sqrt(ms);
  AudioClip out = clip;
  for (double& s : out.samples) s *= scale;
  return out;
}

GateResult gate(const AudioClip& clip, double threshold_db,
                double frame_duration) {
  AudioClip normalized = peak_normalize(clip);
  const std::size_t frame_len = static_cast<std::size_t>(
      std::llround(frame_duration * normalized.sample_rate));
  if (frame_len == 0) throw gate_error("gate: frame shorter than one sample");

  const std::vector<double>& x = normalized.samples;
  const std::size_t n_frames = (x.size() + frame_len - 1) / frame_len;
  GateResult result;
  result.frame_samples = frame_len;
  result.audio.sample_rate = normalized.sample_rate;
  result.audio.channels = 1;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t begin = f * frame_len;
    const std::size_t end = std::min(begin + frame_len, x.size());
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += x[i] * x[i];
    const double rms = std::sqrt(acc / static_cast<double>(end - begin));
    const double rms_db = 20.0 * std::log10(std::max(rms, 1e-300));
    // Inclusive threshold; the 1e-9 slack keeps analytically exact boundary
    // frames on the retained side.
    if (rms_db >= threshold_db - 1e-9) {
      result.retained.push_back(f);
      result.audio.samples.insert(result.audio.samples.end(), x.begin() + begin,
                                  x.begin() + end);
    }
  }
  if (result.retained.empty())
    throw gate_error("gate: no frame above threshold");
  // Re-normalize so gating is idempotent even when the global peak sat in a
  // discarded frame.
  const double p = peak_abs(result.audio.samples);
  if (p > 0.0 && p != 1.0)
    for (double& s : result.audio.samples) s /= p;
  return result;
}

Spectrum power_spectrum(const AudioClip& clip) {
  if (clip.samples.empty()) throw audio_error("power_spectrum: empty clip");
  const std::size_t n = clip.samples.size();
  auto spec = rfft(clip.samples);
  Spectrum out;
  out.bin_freqs.resize(spec.size());
  out.power.resize(spec.size());
  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.bin_freqs[k] =
        static_cast<double>(k) * clip.sample_rate / static_cast<double>(n);
    double p = std::norm(spec[k]) * inv_n2;
    const bool shared = (k == 0) || (n % 2 == 0 && k == spec.size() - 1);
    out.power[k] = shared ? p : 2.0 * p;
  }
  return out;
}

std::size_t band_count(double f_min, double f_max) {
  return static_cast<std::size_t>(std::ceil(48.0 * std::log2(f_max / f_min)));
}

BandSpectrum to_band_spectrum(const Spectrum& spec, double f_min,
                              double f_max) {
  if (spec.bin_freqs.empty()) throw audio_error("to_band_spectrum: empty spectrum");
  const double nyquist = spec.bin_freqs.back();
  if (f_max <= 0.0) f_max = nyquist;
  if (!(f_min > 0.0) || !(f_min < f_max) || f_max > nyquist + 1e-9)
    throw audio_error("to_band_spectrum: invalid band range");

  const std::size_t n_bands = band_count(f_min, f_max);
  BandSpectrum out;
  out.f_min = f_min;
  out.f_max = f_max;
  out.band_centers.resize(n_bands);
  out.band_power.assign(n_bands, 0.0);
  std::vector<bool> filled(n_bands, false);

  const double half_step = std::pow(2.0, 1.0 / 96.0);  // 12.5 cents
  for (std::size_t b = 0; b < n_bands; ++b)
    out.band_centers[b] = f_min * std::pow(2.0, static_cast<double>(b) / 48.0);

  std::size_t lo = 0;
  for (std::size_t b = 0; b < n_bands; ++b) {
    const double lower = out.band_centers[b] / half_step;
    const double upper = out.band_centers[b] * half_step;
    while (lo < spec.bin_freqs.size() && spec.bin_freqs[lo] < lower) ++lo;
    std::size_t hi = lo;
    double acc = 0.0;
    while (hi < spec.bin_freqs.size() && spec.bin_freqs[hi] < upper) {
      acc += spec.power[hi];
      ++hi;
    }
    if (hi > lo) {
      out.band_power[b] = acc / static_cast<double>(hi - lo);
      filled[b] = true;
    }
    lo = hi;
  }

  std::size_t n_filled = static_cast<std::size_t>(
      std::count(filled.begin(), filled.end(), true));
  if (n_filled < 2)
    throw audio_error("to_band_spectrum: fewer than two nonempty bands");

  // Interpolate gaps; hold the boundary value past the first/last filled band.
  std::size_t prev = n_bands;
  for (std::size_t b = 0; b < n_bands; ++b) {
    if (filled[b]) {
      if (prev == n_bands) {
        for (std::size_t k = 0; k < b; ++k) out.band_power[k] = out.band_power[b];
      } else if (b > prev + 1) {
        for (std::size_t k = prev + 1; k < b; ++k) {
          const double t = static_cast<double>(k - prev) /
                           static_cast<double>(b - prev);
          out.band_power[k] = (1.0 - t) * out.band_power[prev] +
                              t * out.band_power[b];
        }
      }
      prev = b;
    }
  }
  for (std::size_t b = prev + 1; b < n_bands; ++b)
    out.band_power[b] = out.band_power[prev];
  return out;
}

Envelope envelope(const AudioClip& clip, double window, double hop) {
  const std::size_t win = static_cast<std::size_t>(
      std::llround(window * clip.sample_rate));
  const std::size_t step = hop <= 0.0
                               ? win
                               : static_cast<std::size_t>(std::llround(
                                     hop * clip.sample_rate));
  if (win == 0 || step == 0 || clip.samples.size() < win)
    throw audio_error("envelope: clip shorter than one window");
  Envelope out;
  out.window_duration = static_cast<double>(win) / clip.sample_rate;
  out.hop_duration = static_cast<double>(step) / clip.sample_rate;
  // Running sum of squares so overlapping windows stay linear-time.
  std::vector<double> prefix(clip.samples.size() + 1, 0.0);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    prefix[i + 1] = prefix[i] + clip.samples[i] * clip.samples[i];
  for (std::size_t begin = 0; begin + win <= clip.samples.size();
       begin += step)
    out.values.push_back(std::sqrt((prefix[begin + win] - prefix[begin]) /
                                   static_cast<double>(win)));
  return out;
}

}  // namespace tonelab
