#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tonelab/audio.hpp"
#include "tonelab/features.hpp"

namespace tonelab {

/// Partial replacing the harmonic default at (1-based) index k.
struct PartialOverride {
  std::size_t index = 1;
  double freq = 0.0;
  double amp = 1.0;
};

/// Additive-synthesis description: n_partials partials with amplitude
/// s^(k-1); with b_coeff > 0 partial frequencies follow the stiff-string
/// model f_k = k*f0*sqrt(1 + b_coeff*k^2).
struct ToneSpec {
  double f0 = 220.0;
  std::size_t n_partials = 10;
  double s = 0.8;
  double b_coeff = 0.0;
  std::vector<PartialOverride> partial_overrides;
  double duration = 1.0;
  int sample_rate = 22050;
  /// Drop partials at or above Nyquist instead of failing; experiment sweeps
  /// whose upper partials run off the top set this.
  bool drop_above_nyquist = false;
};

/// Median / 25th / 75th percentile of a measured value per sweep point.
struct ExperimentResult {
  std::vector<double> x_axis;
  std::vector<double> median;
  std::vector<double> p25;
  std::vector<double> p75;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

/// HR of every pairing of partials drawn from the union of two tones' partial
/// lists. Entries 0..n_from_a-1 come from the first tone.
struct PartialMatrix {
  std::vector<double> freqs;
  std::vector<double> amps;
  std::size_t n_from_a = 0;
  std::vector<std::vector<double>> hr;
};

/// Envelope spectra across an interval sweep plus the HR curve over the same
/// sweep.
struct BeatingMap {
  std::vector<double> interval_cents;
  std::vector<double> env_freqs;
  std::vector<std::vector<double>> env_power;
  Curve hr;
};

class synth_error : public audio_error {
 public:
  using audio_error::audio_error;
};

/// Deterministic generator with explicit, implementation-pinned mappings from
/// raw 64-bit output to doubles (standard distribution objects are not
/// bit-portable across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();  // standard normal, Box-Muller
  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Independent child seed for a named stream (trial index, sweep point, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Additive render with zero initial phases, peak-normalized.
AudioClip render(const ToneSpec& spec);

/// Seeded Gaussian white noise (unit variance before any normalization).
AudioClip white_noise(double duration, std::uint64_t seed,
                      int sample_rate = 22050);

/// Seeded 1/f-power noise synthesized in the frequency domain.
AudioClip pink_noise(double duration, std::uint64_t seed,
                     int sample_rate = 22050);

/// clip + white noise scaled so RMS(clip)/RMS(noise) = 10^(snr_db/20).
AudioClip add_noise(const AudioClip& clip, double snr_db, std::uint64_t seed);

/// Median frame-wise harmonic ratio of a clip (the HR the experiments sweep).
double clip_hr(const AudioClip& clip, const FrameConfig& cfg = {});

/// Power spectrum of the mean-removed RMS envelope. A hop shorter than the
/// window oversamples the envelope so beat components well above the
/// window-rate Nyquist stay distinguishable from slow beating.
Spectrum envelope_spectrum(const AudioClip& clip, double window = 0.05,
                           double hop = 0.0);

ExperimentResult experiment_inharmonic_partials(double s = 0.8,
                                                std::size_t trials = 50,
                                                std::uint64_t seed = 1,
                                                double f0 = 220.0);

Curve experiment_shift_partial(std::size_t partial_index = 4,
                               std::size_t steps = 200, double f0 = 220.0);

Curve experiment_two_sine(double f_low = 220.0, double max_cents = 2400.0,
                          double step_cents = 1.0);

enum class ScaleCase { continuous, chromatic_et, triad_et, triad_just };

ExperimentResult experiment_scales(ScaleCase scale_case,
                                   std::size_t max_tones = 10,
                                   std::size_t trials = 500,
                                   std::uint64_t seed = 1);

PartialMatrix pairwise_partial_matrix(const ToneSpec& a, const ToneSpec& b);

BeatingMap beating_map(double f0 = 220.0, double max_cents = 2400.0,
                       double step_cents = 5.0, std::size_t n_partials = 40,
                       double s = 0.95, double env_window = 0.05,
                       double duration = 4.0, double env_hop = 0.005);

struct NoiseVsSines {
  Curve noise;               // x = SNR dB (descending), y = HR
  ExperimentResult sines;    // x = number of added random sines
};

NoiseVsSines experiment_noise_vs_sines(std::size_t trials = 200,
                                       std::uint64_t seed = 1);

}  // namespace tonelab
