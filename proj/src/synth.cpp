#include "tonelab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tonelab/fft.hpp"

namespace tonelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Partial {
  double freq;
  double amp;
};

std::vector<Partial> partial_list(const ToneSpec& spec) {
  if (spec.f0 <= 0.0 || spec.n_partials == 0 || spec.sample_rate <= 0 ||
      spec.duration <= 0.0)
    throw synth_error("render: invalid tone spec");
  const double nyquist = 0.5 * spec.sample_rate;
  std::vector<Partial> partials;
  for (std::size_t k = 1; k <= spec.n_partials; ++k) {
    const double kk = static_cast<double>(k);
    Partial p{kk * spec.f0 * std::sqrt(1.0 + spec.b_coeff * kk * kk),
              std::pow(spec.s, kk - 1.0)};
    for (const auto& o : spec.partial_overrides)
      if (o.index == k) {
        p.freq = o.freq;
        p.amp = o.amp;
      }
    if (p.freq >= nyquist) {
      if (spec.drop_above_nyquist) continue;
      throw synth_error("render: partial above Nyquist");
    }
    partials.push_back(p);
  }
  if (partials.empty()) throw synth_error("render: no partials below Nyquist");
  return partials;
}

/// Sum of sin oscillators via the two-term recurrence
/// x[n+1] = 2 cos(w) x[n] - x[n-1], zero initial phase.
void add_sine(std::vector<double>& out, double freq, double amp,
              int sample_rate) {
  const double w = kTwoPi * freq / sample_rate;
  const double c = 2.0 * std::cos(w);
  double x_prev = -std::sin(w);  // sin(-w)
  double x = 0.0;                // sin(0)
  for (double& o : out) {
    o += amp * x;
    const double next = c * x - x_prev;
    x_prev = x;
    x = next;
  }
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return (1.0 - t) * sorted[lo] + t * sorted[hi];
}

void push_stats(ExperimentResult& res, double x, std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  res.x_axis.push_back(x);
  res.p25.push_back(percentile_sorted(vals, 25.0));
  res.median.push_back(percentile_sorted(vals, 50.0));
  res.p75.push_back(percentile_sorted(vals, 75.0));
}

AudioClip mix_and_normalize(std::vector<double> samples, int sample_rate) {
  AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate = sample_rate;
  clip.channels = 1;
  return peak_normalize(clip);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  have_spare_ = true;
  spare_ = r * std::sin(kTwoPi * u2);
  return r * std::cos(kTwoPi * u2);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (stream * 0xD1B54A32D192ED03ULL);
  splitmix64(state);
  return splitmix64(state);
}

AudioClip render(const ToneSpec& spec) {
  const auto partials = partial_list(spec);
  const std::size_t n = static_cast<std::size_t>(
      std::llround(spec.duration * spec.sample_rate));
  if (n == 0) throw synth_error("render: zero-length tone");
  std::vector<double> samples(n, 0.0);
  for (const auto& p : partials)
    add_sine(samples, p.freq, p.amp, spec.sample_rate);
  return mix_and_normalize(std::move(samples), spec.sample_rate);
}

AudioClip white_noise(double duration, std::uint64_t seed, int sample_rate) {
  const std::size_t n = static_cast<std::size_t>(
      std::llround(duration * sample_rate));
  if (n == 0) throw synth_error("white_noise: zero duration");
  Rng rng(seed);
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels = 1;
  clip.samples.resize(n);
  for (double& s : clip.samples) s = rng.gaussian();
  return clip;
}

AudioClip pink_noise(double duration, std::uint64_t seed, int sample_rate) {
  const std::size_t n = static_cast<std::size_t>(
      std::llround(duration * sample_rate));
  if (n == 0) throw synth_error("pink_noise: zero duration");
  Rng rng(seed);
  std::vector<std::complex<double>> spec(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double amp = 1.0 / std::sqrt(static_cast<double>(k));
    const double phase = kTwoPi * rng.uniform();
    spec[k] = std::polar(amp, phase);
  }
  if (n % 2 == 0) spec.back() = spec.back().real();
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels = 1;
  clip.samples = irfft(spec, n);
  return clip;
}

AudioClip add_noise(const AudioClip& clip, double snr_db, std::uint64_t seed) {
  double ms = 0.0;
  for (double s : clip.samples) ms += s * s;
  ms /= static_cast<double>(clip.samples.size());
  if (ms <= 0.0) throw synth_error("add_noise: all-zero clip");

  AudioClip noise = white_noise(clip.duration(), seed, clip.sample_rate);
  noise.samples.resize(clip.samples.size(), 0.0);
  double ms_n = 0.0;
  for (double s : noise.samples) ms_n += s * s;
  ms_n /= static_cast<double>(noise.samples.size());
  const double scale = std::sqrt(ms / ms_n) / std::pow(10.0, snr_db / 20.0);

  AudioClip out = clip;
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] += scale * noise.samples[i];
  return out;
}

double clip_hr(const AudioClip& clip, const FrameConfig& cfg) {
  return 1.0 - hr_inharmonicity(clip, cfg);
}

Spectrum envelope_spectrum(const AudioClip& clip, double window, double hop) {
  Envelope env = envelope(clip, window, hop);
  double mean = 0.0;
  for (double v : env.values) mean += v;
  mean /= static_cast<double>(env.values.size());
  AudioClip env_clip;
  env_clip.sample_rate =
      static_cast<int>(std::llround(1.0 / env.hop_duration));
  env_clip.channels = 1;
  env_clip.samples.reserve(env.values.size());
  for (double v : env.values) env_clip.samples.push_back(v - mean);
  return power_spectrum(env_clip);
}

ExperimentResult experiment_inharmonic_partials(double s, std::size_t trials,
                                                std::uint64_t seed,
                                                double f0) {
  constexpr std::size_t kPartials = 10;
  ExperimentResult res;
  res.trials = trials;
  res.seed = seed;
  for (std::size_t n_inh = 0; n_inh <= kPartials; ++n_inh) {
    std::vector<double> vals;
    vals.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, n_inh * 1000 + trial));
      // Draw n_inh distinct partial indices (partial Fisher-Yates).
      std::vector<std::size_t> idx(kPartials);
      for (std::size_t i = 0; i < kPartials; ++i) idx[i] = i + 1;
      for (std::size_t i = 0; i < n_inh; ++i)
        std::swap(idx[i], idx[i + rng.next_below(kPartials - i)]);

      ToneSpec spec;
      spec.f0 = f0;
      spec.n_partials = kPartials;
      spec.s = s;
      spec.drop_above_nyquist = true;
      for (std::size_t i = 0; i < n_inh; ++i) {
        const std::size_t k = idx[i];
        // Multiplicative detune uniform in +-[0.5%, 3%]; draws closer to the
        // harmonic position than 0.5% are excluded by construction.
        const double mag = rng.uniform(0.005, 0.03);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        spec.partial_overrides.push_back(
            {k, static_cast<double>(k) * f0 * (1.0 + sign * mag),
             std::pow(s, static_cast<double>(k) - 1.0)});
      }
      vals.push_back(clip_hr(render(spec)));
    }
    push_stats(res, static_cast<double>(n_inh), std::move(vals));
  }
  return res;
}

Curve experiment_shift_partial(std::size_t partial_index, std::size_t steps,
                               double f0) {
  if (partial_index < 1 || partial_index >= 10)
    throw synth_error("experiment_shift_partial: index out of range");
  Curve curve;
  const double base = static_cast<double>(partial_index) * f0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double freq =
        base + f0 * static_cast<double>(i) / static_cast<double>(steps);
    ToneSpec spec;
    spec.f0 = f0;
    spec.n_partials = 10;
    spec.s = 0.8;
    spec.partial_overrides.push_back(
        {partial_index, freq,
         std::pow(0.8, static_cast<double>(partial_index) - 1.0)});
    curve.x.push_back(freq);
    curve.y.push_back(clip_hr(render(spec)));
  }
  return curve;
}

Curve experiment_two_sine(double f_low, double max_cents, double step_cents) {
  Curve curve;
  for (double cents = 0.0; cents <= max_cents + 1e-9; cents += step_cents) {
    ToneSpec spec;
    spec.f0 = f_low;
    spec.n_partials = 2;
    spec.s = 1.0;
    spec.partial_overrides.push_back(
        {2, f_low * std::pow(2.0, cents / 1200.0), 1.0});
    curve.x.push_back(cents);
    curve.y.push_back(clip_hr(render(spec)));
  }
  return curve;
}

ExperimentResult experiment_scales(ScaleCase scale_case, std::size_t max_tones,
                                   std::size_t trials, std::uint64_t seed) {
  constexpr double kLow = 220.0, kHigh = 2200.0;
  // Discrete fundamental grids for the non-continuous cases.
  std::vector<double> grid;
  switch (scale_case) {
    case ScaleCase::continuous:
      break;
    case ScaleCase::chromatic_et:
      for (int m = 0;; ++m) {
        const double f = kLow * std::pow(2.0, m / 12.0);
        if (f > kHigh + 1e-9) break;
        grid.push_back(f);
      }
      break;
    case ScaleCase::triad_et:
      for (int m = 0;; ++m) {
        const double f = kLow * std::pow(2.0, m / 12.0);
        if (f > kHigh + 1e-9) break;
        const int pc = m % 12;
        if (pc == 0 || pc == 4 || pc == 7) grid.push_back(f);
      }
      break;
    case ScaleCase::triad_just:
      for (int oct = 0; oct < 5; ++oct)
        for (double r : {1.0, 5.0 / 4.0, 3.0 / 2.0}) {
          const double f = kLow * r * std::pow(2.0, oct);
          if (f <= kHigh + 1e-9) grid.push_back(f);
        }
      std::sort(grid.begin(), grid.end());
      break;
  }

  ExperimentResult res;
  res.trials = trials;
  res.seed = seed;
  for (std::size_t count = 1; count <= max_tones; ++count) {
    std::vector<double> vals;
    vals.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, count * 100000 + trial));
      std::vector<double> mix(22050, 0.0);
      for (std::size_t v = 0; v < count; ++v) {
        const double f0 = grid.empty()
                              ? rng.uniform(kLow, kHigh)
                              : grid[rng.next_below(grid.size())];
        ToneSpec spec;
        spec.f0 = f0;
        spec.drop_above_nyquist = true;
        const AudioClip tone = render(spec);
        for (std::size_t i = 0; i < mix.size(); ++i)
          mix[i] += tone.samples[i];
      }
      vals.push_back(clip_hr(mix_and_normalize(std::move(mix), 22050)));
    }
    push_stats(res, static_cast<double>(count), std::move(vals));
  }
  return res;
}

PartialMatrix pairwise_partial_matrix(const ToneSpec& a, const ToneSpec& b) {
  PartialMatrix m;
  for (const auto& p : partial_list(a)) {
    m.freqs.push_back(p.freq);
    m.amps.push_back(p.amp);
  }
  m.n_from_a = m.freqs.size();
  for (const auto& p : partial_list(b)) {
    m.freqs.push_back(p.freq);
    m.amps.push_back(p.amp);
  }
  const std::size_t n = m.freqs.size();
  m.hr.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ToneSpec pair;
      pair.f0 = m.freqs[i];
      pair.n_partials = 2;
      pair.partial_overrides.push_back({1, m.freqs[i], m.amps[i]});
      pair.partial_overrides.push_back({2, m.freqs[j], m.amps[j]});
      const double hr = clip_hr(render(pair));
      m.hr[i][j] = hr;
      m.hr[j][i] = hr;
    }
  return m;
}

BeatingMap beating_map(double f0, double max_cents, double step_cents,
                       std::size_t n_partials, double s, double env_window,
                       double duration, double env_hop) {
  BeatingMap map;
  ToneSpec base;
  base.f0 = f0;
  base.n_partials = n_partials;
  base.s = s;
  base.duration = duration;
  base.drop_above_nyquist = true;
  const AudioClip tone1 = render(base);

  ToneSpec hr_base = base;
  hr_base.n_partials = 10;
  hr_base.s = 0.8;
  hr_base.duration = 1.0;
  const AudioClip hr_tone1 = render(hr_base);

  for (double cents = 0.0; cents <= max_cents + 1e-9; cents += step_cents) {
    const double f = f0 * std::pow(2.0, cents / 1200.0);

    ToneSpec other = base;
    other.f0 = f;
    const AudioClip tone2 = render(other);
    std::vector<double> mix(tone1.samples);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += tone2.samples[i];
    const Spectrum env = envelope_spectrum(
        mix_and_normalize(std::move(mix), base.sample_rate), env_window,
        env_hop);
    if (map.env_freqs.empty()) map.env_freqs = env.bin_freqs;
    map.interval_cents.push_back(cents);
    map.env_power.push_back(env.power);

    ToneSpec hr_other = hr_base;
    hr_other.f0 = f;
    const AudioClip hr_tone2 = render(hr_other);
    std::vector<double> hr_mix(hr_tone1.samples);
    for (std::size_t i = 0; i < hr_mix.size(); ++i)
      hr_mix[i] += hr_tone2.samples[i];
    map.hr.x.push_back(cents);
    map.hr.y.push_back(
        clip_hr(mix_and_normalize(std::move(hr_mix), base.sample_rate)));
  }
  return map;
}

NoiseVsSines experiment_noise_vs_sines(std::size_t trials,
                                       std::uint64_t seed) {
  NoiseVsSines out;
  ToneSpec sine_spec;
  sine_spec.n_partials = 1;
  const AudioClip sine = render(sine_spec);

  for (int snr = 40; snr >= 0; snr -= 4) {
    out.noise.x.push_back(snr);
    out.noise.y.push_back(clip_hr(
        add_noise(sine, snr, derive_seed(seed, 900000 + snr))));
  }

  out.sines.trials = trials;
  out.sines.seed = seed;
  const double nyquist = 0.5 * sine_spec.sample_rate;
  for (std::size_t k = 1; k <= 30; ++k) {
    std::vector<double> vals;
    vals.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, k * 10000 + trial));
      std::vector<double> mix(sine.samples);
      for (std::size_t j = 0; j < k; ++j)
        add_sine(mix, rng.uniform(20.0, nyquist), 1.0, sine_spec.sample_rate);
      vals.push_back(clip_hr(mix_and_normalize(std::move(mix), 22050)));
    }
    push_stats(out.sines, static_cast<double>(k), std::move(vals));
  }
  return out;
}

}  // namespace tonelab
