// Acceptance suite: one test case per numbered criterion. Each case prints a
// single summary line ("[PASS]"/"[FAIL]") in addition to its assertions so a
// full run reads as a checklist.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tonelab/audio.hpp"
#include "tonelab/corpus.hpp"
#include "tonelab/features.hpp"
#include "tonelab/fft.hpp"
#include "tonelab/stats.hpp"
#include "tonelab/synth.hpp"
#include "tonelab/wav.hpp"
#include "tonelab/weighting.hpp"

using namespace tonelab;

namespace {

class Criterion {
 public:
  Criterion(const char* id, const char* summary, double budget_seconds)
      : id_(id), summary_(summary), budget_(budget_seconds),
        start_(std::chrono::steady_clock::now()) {}

  void check(const char* what, bool ok) {
    if (!ok) failures_.push_back(what);
    CHECK_MESSAGE(ok, std::string(what));
  }

  ~Criterion() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    const bool in_budget = elapsed < budget_;
    CHECK_MESSAGE(in_budget, "runtime budget");
    std::printf("[%s] %s: %s (%.1f s of %.0f s budget)\n",
                failures_.empty() && in_budget ? "PASS" : "FAIL", id_,
                summary_, elapsed, budget_);
    for (const auto& f : failures_) std::printf("       failed: %s\n", f.c_str());
    std::fflush(stdout);
  }

 private:
  const char* id_;
  const char* summary_;
  double budget_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> failures_;
};

AudioClip make_sine(double freq, double amp = 1.0, double duration = 1.0,
                    int rate = 22050) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.channels = 1;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * rate));
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    clip.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return clip;
}

}  // namespace

TEST_CASE("01_harmonic_baseline") {
  Criterion c("01_harmonic_baseline",
              "harmonic 10-partial tone measures as harmonic", 1.0);
  ToneSpec spec;  // 220 Hz, 10 partials, s = 0.8, 1 s
  const double inharm = hr_inharmonicity(render(spec));
  c.check("HR-inharmonicity <= 0.01", inharm <= 0.01);
}

TEST_CASE("02_noise_inharmonicity_equivalence") {
  Criterion c("02_noise_inharmonicity_equivalence",
              "13.5 dB SNR noise and B=0.002 stiffness both land on HR 0.9558",
              5.0);
  ToneSpec spec;
  const AudioClip tone = render(spec);
  const double hr_noisy = clip_hr(add_noise(tone, 13.5, 20260824));
  ToneSpec stiff = spec;
  stiff.b_coeff = 0.002;
  const double hr_stiff = clip_hr(render(stiff));
  std::printf("       hr(tone+13.5dB noise)=%.4f hr(B=0.002)=%.4f\n",
              hr_noisy, hr_stiff);
  c.check("noisy tone HR = 0.9558 +- 0.02", std::abs(hr_noisy - 0.9558) <= 0.02);
  c.check("stiff tone HR = 0.9558 +- 0.02", std::abs(hr_stiff - 0.9558) <= 0.02);
  c.check("both within 0.01 of each other", std::abs(hr_noisy - hr_stiff) <= 0.01);
}

TEST_CASE("03_two_sine_just_ratios") {
  Criterion c("03_two_sine_just_ratios",
              "two-sine sweep peaks at the just ratios", 120.0);
  const Curve curve = experiment_two_sine(220.0, 2400.0, 1.0);
  auto value_at = [&](double cents) {
    const auto i = static_cast<std::size_t>(std::llround(cents));
    return curve.y[i];
  };
  auto local_max_near = [&](double cents) {
    // Location of the maximum inside a +-20 cent window.
    const auto lo = static_cast<std::size_t>(std::llround(cents - 20.0));
    const auto hi = static_cast<std::size_t>(std::llround(cents + 20.0));
    std::size_t best = lo;
    for (std::size_t i = lo; i <= hi; ++i)
      if (curve.y[i] > curve.y[best]) best = i;
    return static_cast<double>(best);
  };
  const struct {
    const char* name;
    double cents;
  } ratios[] = {{"2/1", 1200.0},
                {"3/2", 701.955},
                {"4/3", 498.045},
                {"5/3", 884.359},
                {"5/4", 386.314}};
  for (const auto& r : ratios) {
    const double at = local_max_near(r.cents);
    std::printf("       %s: window max at %+.0f cents from just\n", r.name,
                at - r.cents);
    std::string label = std::string("local max within 5 cents of ") + r.name;
    c.check(label.c_str(), std::abs(at - r.cents) <= 5.0);
  }
  // Global maximum over ratios in (1, 4], i.e. cents in [1, 2400].
  std::size_t global = 1;
  for (std::size_t i = 1; i < curve.y.size(); ++i)
    if (curve.y[i] > curve.y[global]) global = i;
  std::printf("       global max at %zu cents (hr %.6f; hr@1200 %.6f)\n",
              global, curve.y[global], value_at(1200.0));
  c.check("octave maximum is global over (1,4]",
          std::abs(static_cast<double>(global) - 1200.0) <= 5.0);
}

TEST_CASE("04_scale_case_ordering") {
  Criterion c("04_scale_case_ordering",
              "HR ordering across scale construction at 8 voices", 600.0);
  const std::size_t trials = 100;
  const std::uint64_t seed = 4;
  const auto cont = experiment_scales(ScaleCase::continuous, 8, trials, seed);
  const auto chrom = experiment_scales(ScaleCase::chromatic_et, 8, trials, seed);
  const auto tri_et = experiment_scales(ScaleCase::triad_et, 8, trials, seed);
  const auto tri_just = experiment_scales(ScaleCase::triad_just, 8, trials, seed);
  const std::size_t at8 = 7;  // x_axis value 8
  const double m_cont = cont.median[at8];
  const double m_chrom = chrom.median[at8];
  const double m_et = tri_et.median[at8];
  const double m_just = tri_just.median[at8];
  const double iqr_et = tri_et.p75[at8] - tri_et.p25[at8];
  std::printf("       medians: cont %.3f chrom %.3f triad-ET %.3f "
              "triad-just %.3f (ET IQR %.3f)\n",
              m_cont, m_chrom, m_et, m_just, iqr_et);
  c.check("median(continuous) < median(chromatic)", m_cont < m_chrom);
  c.check("median(chromatic) < median(triad-ET)", m_chrom < m_et);
  c.check("triad-just within triad-ET IQR of triad-ET",
          std::abs(m_just - m_et) < iqr_et);
}

TEST_CASE("05_noise_vs_sines_crossing") {
  Criterion c("05_noise_vs_sines_crossing",
              "equal-RMS noise is as inharmonic as 10-18 random sines", 300.0);
  const auto res = experiment_noise_vs_sines(200, 5);
  const double hr_noise0 = res.noise.y.back();  // SNR 0 dB
  // First sine count whose median HR drops to the noise value.
  double crossing = 31.0;
  for (std::size_t i = 0; i < res.sines.x_axis.size(); ++i)
    if (res.sines.median[i] <= hr_noise0) {
      crossing = res.sines.x_axis[i];
      break;
    }
  std::printf("       hr(SNR 0 dB) = %.3f; crossing at k = %.0f\n", hr_noise0,
              crossing);
  c.check("crossing within k in [10, 18]", crossing >= 10.0 && crossing <= 18.0);
}

TEST_CASE("06_flatness_baselines") {
  Criterion c("06_flatness_baselines",
              "flatness hits the reference white/pink values; WE tracks "
              "spectral variance", 60.0);
  const double white = spectral_flatness(
      to_band_spectrum(power_spectrum(rms_normalize(white_noise(10.0, 6)))));
  const double pink = spectral_flatness(
      to_band_spectrum(power_spectrum(rms_normalize(pink_noise(10.0, 6)))));
  std::printf("       flatness: white %.4f pink %.4f\n", white, pink);
  c.check("white flatness = 0.998 +- 0.005", std::abs(white - 0.998) <= 0.005);
  c.check("pink flatness = 0.84 +- 0.05", std::abs(pink - 0.84) <= 0.05);

  // Wiener entropy against the relative variance of synthetic band spectra.
  Rng rng(66);
  std::vector<double> we, rel_var;
  for (int trial = 0; trial < 200; ++trial) {
    const double eps = 0.01 + 0.29 * trial / 199.0;
    BandSpectrum bands;
    bands.band_power.resize(480);
    for (double& p : bands.band_power)
      p = 1.0 + eps * (rng.uniform() - 0.5);
    double mean = 0.0;
    for (double p : bands.band_power) mean += p;
    mean /= 480.0;
    double var = 0.0;
    for (double p : bands.band_power) var += (p - mean) * (p - mean);
    var /= 480.0;
    we.push_back(spectral_flatness(bands));
    rel_var.push_back(var / (mean * mean));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < 200; ++i) {
    mx += rel_var[i];
    my += we[i];
  }
  mx /= 200.0;
  my /= 200.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < 200; ++i) {
    sxy += (rel_var[i] - mx) * (we[i] - my);
    sxx += (rel_var[i] - mx) * (rel_var[i] - mx);
    syy += (we[i] - my) * (we[i] - my);
  }
  const double pearson = sxy / std::sqrt(sxx * syy);
  std::printf("       WE-vs-variance Pearson r = %.5f\n", pearson);
  c.check("|Pearson(WE, relative variance)| > 0.99", std::abs(pearson) > 0.99);
}

TEST_CASE("07_prominence_separation") {
  Criterion c("07_prominence_separation",
              "noise colors sit together, far from tonal content", 30.0);
  const double p_white = peak_prominence(white_noise(10.0, 7));
  const double p_pink = peak_prominence(pink_noise(10.0, 7));
  ToneSpec spec;
  spec.duration = 10.0;
  AudioClip mix = render(spec);
  ToneSpec fifth = spec;
  fifth.f0 = 330.0;
  const AudioClip other = render(fifth);
  for (std::size_t i = 0; i < mix.samples.size(); ++i)
    mix.samples[i] += other.samples[i];
  const double p_music = peak_prominence(mix);
  std::printf("       prominence: white %.3g pink %.3g tonal mix %.3g\n",
              p_white, p_pink, p_music);
  const double separation = p_music - std::max(p_white, p_pink);
  c.check("|white - pink| < 0.1 x (music - max(noise))",
          std::abs(p_white - p_pink) < 0.1 * separation);
}

TEST_CASE("08_medium_robustness") {
  Criterion c("08_medium_robustness",
              "40 dB SNR noise barely moves either feature", 300.0);
  const auto weights = contour_to_weights(iso226_contour(50.0));
  std::vector<double> d_noisiness, d_inharm;
  Rng rng(88);
  for (int track = 0; track < 50; ++track) {
    ToneSpec spec;
    spec.f0 = 80.0 + 12.0 * track;
    spec.n_partials = 4 + track % 8;
    spec.s = 0.6 + 0.04 * (track % 10);
    spec.b_coeff = (track % 5) * 5e-4;
    spec.drop_above_nyquist = true;
    AudioClip clip = render(spec);
    if (track % 3 == 0)
      clip = add_noise(clip, 25.0, rng.next_u64());  // some already-noisy tracks
    const TrackFeatures base = track_features(clip, weights);
    const TrackFeatures noisy =
        track_features(add_noise(clip, 40.0, rng.next_u64()), weights);
    d_noisiness.push_back(std::abs(noisy.noisiness_raw - base.noisiness_raw));
    d_inharm.push_back(
        std::abs(noisy.hr_inharmonicity_raw - base.hr_inharmonicity_raw));
  }
  std::sort(d_noisiness.begin(), d_noisiness.end());
  std::sort(d_inharm.begin(), d_inharm.end());
  const double med_n =
      0.5 * (d_noisiness[24] + d_noisiness[25]);
  const double med_h = 0.5 * (d_inharm[24] + d_inharm[25]);
  std::printf("       median |delta|: noisiness %.3g inharmonicity %.3g\n",
              med_n, med_h);
  c.check("median |delta noisiness| < 1e-3", med_n < 1e-3);
  c.check("median |delta HR-inharmonicity| < 5e-3", med_h < 5e-3);
}

TEST_CASE("09_beating") {
  Criterion c("09_beating",
              "4 Hz beat shows up in the envelope spectrum; a just fifth "
              "leaves none", 30.0);
  AudioClip beat = make_sine(220.0, 0.5, 4.0);
  const AudioClip detuned = make_sine(224.0, 0.5, 4.0);
  for (std::size_t i = 0; i < beat.samples.size(); ++i)
    beat.samples[i] += detuned.samples[i];
  // Envelope oversampled (5 ms hop under the 50 ms window) so the sub-20 Hz
  // range is unaliased: fast difference-frequency ripple stays at its own
  // frequency instead of folding into the beat band.
  const Spectrum env = envelope_spectrum(beat, 0.05, 0.0025);
  std::size_t peak = 1;
  for (std::size_t k = 1; k < env.power.size(); ++k)
    if (env.power[k] > env.power[peak]) peak = k;
  const double bin_width = env.bin_freqs[1] - env.bin_freqs[0];
  std::printf("       beat peak at %.2f Hz (bin width %.2f Hz)\n",
              env.bin_freqs[peak], bin_width);
  c.check("envelope peak at 4 Hz +- one bin",
          std::abs(env.bin_freqs[peak] - 4.0) <= bin_width + 1e-9);

  AudioClip fifth = make_sine(220.0, 0.5, 4.0);
  const AudioClip upper = make_sine(330.0, 0.5, 4.0);
  for (std::size_t i = 0; i < fifth.samples.size(); ++i)
    fifth.samples[i] += upper.samples[i];
  const Spectrum env5 = envelope_spectrum(fifth, 0.05, 0.0025);
  std::vector<double> sorted(env5.power.begin() + 1, env5.power.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  double worst = 0.0;
  for (std::size_t k = 1; k < env5.power.size(); ++k)
    if (env5.bin_freqs[k] < 20.0) worst = std::max(worst, env5.power[k]);
  std::printf("       just fifth: sub-20 Hz max %.3g vs median %.3g\n", worst,
              median);
  c.check("just fifth: no sub-20 Hz envelope peak above 10x median",
          worst <= 10.0 * median);
}

TEST_CASE("10_pca_suite") {
  Criterion c("10_pca_suite", "projection basis properties on seeded clouds",
              10.0);
  Rng rng(10);
  std::vector<std::array<double, 2>> cloud;
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.gaussian();
    cloud.push_back(
        {1.5 * t + 0.4 * rng.gaussian(), 1.1 * t + 0.6 * rng.gaussian()});
  }
  const Pca2 p = fit_pca2(cloud);
  const auto& comp = p.components;
  c.check("PC1 unit norm (1e-12)",
          std::abs(comp[0][0] * comp[0][0] + comp[0][1] * comp[0][1] - 1.0) <
              1e-12);
  c.check("PC2 unit norm (1e-12)",
          std::abs(comp[1][0] * comp[1][0] + comp[1][1] * comp[1][1] - 1.0) <
              1e-12);
  c.check("PC1 . PC2 = 0 (1e-12)",
          std::abs(comp[0][0] * comp[1][0] + comp[0][1] * comp[1][1]) < 1e-12);
  c.check("PC1 sign convention", comp[0][0] + comp[0][1] >= 0.0);
  c.check("PC2 sign convention", comp[1][1] - comp[1][0] >= 0.0);
  c.check("variance ordering", p.variance[0] >= p.variance[1]);

  double worst = 0.0;
  for (const auto& pt : cloud) {
    const auto back = pca_unproject(p, pca_project(p, pt));
    worst = std::max({worst, std::abs(back[0] - pt[0]),
                      std::abs(back[1] - pt[1])});
  }
  c.check("round trip < 1e-9", worst < 1e-9);

  std::array<double, 2> mean{0.0, 0.0};
  for (const auto& pt : cloud) {
    mean[0] += pt[0];
    mean[1] += pt[1];
  }
  mean[0] /= cloud.size();
  mean[1] /= cloud.size();
  double total = 0.0;
  for (const auto& pt : cloud)
    total += (pt[0] - mean[0]) * (pt[0] - mean[0]) +
             (pt[1] - mean[1]) * (pt[1] - mean[1]);
  total /= cloud.size();
  c.check("var(pc1)+var(pc2) = total variance (1e-9)",
          std::abs(p.variance[0] + p.variance[1] - total) < 1e-9);

  auto shuffled = cloud;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng.next_below(i + 1)]);
  const Pca2 p2 = fit_pca2(shuffled);
  double drift = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      drift = std::max(drift,
                       std::abs(p.components[i][j] - p2.components[i][j]));
  c.check("permutation-stable fit", drift < 1e-9);
}

TEST_CASE("11_weighting") {
  Criterion c("11_weighting", "loudness weighting tilts the features as the "
                              "contour dictates", 30.0);
  const auto weights = contour_to_weights(iso226_contour(50.0));
  c.check("gain(1 kHz) = 1 +- 1e-9",
          std::abs(weights.gain_at(1000.0) - 1.0) <= 1e-9);
  c.check("gain(50 Hz) < 1", weights.gain_at(50.0) < 1.0);

  // Bass-heavy harmonic tone plus a 3 kHz noise band.
  ToneSpec spec;
  spec.f0 = 40.0;
  AudioClip mix = render(spec);
  AudioClip noise = white_noise(1.0, 11);
  auto nspec = rfft(noise.samples);
  for (std::size_t k = 0; k < nspec.size(); ++k) {
    const double f = static_cast<double>(k) * 22050.0 /
                     static_cast<double>(noise.samples.size());
    if (f < 2500.0 || f > 3500.0) nspec[k] = 0.0;
  }
  noise.samples = irfft(nspec, noise.samples.size());
  const double tone_rms = [&] {
    double acc = 0.0;
    for (double s : mix.samples) acc += s * s;
    return std::sqrt(acc / mix.samples.size());
  }();
  const double noise_rms = [&] {
    double acc = 0.0;
    for (double s : noise.samples) acc += s * s;
    return std::sqrt(acc / noise.samples.size());
  }();
  for (std::size_t i = 0; i < mix.samples.size(); ++i)
    mix.samples[i] += noise.samples[i] * (0.2 * tone_rms / noise_rms);

  const TrackFeatures f = track_features(mix, weights);
  std::printf("       noisiness raw %.4g weighted %.4g\n", f.noisiness_raw,
              f.noisiness_weighted);
  c.check("weighted noisiness > raw noisiness",
          f.noisiness_weighted > f.noisiness_raw);
}

TEST_CASE("12_gating") {
  Criterion c("12_gating", "a quiet tail leaves both features untouched", 30.0);
  const auto weights = contour_to_weights(iso226_contour(50.0));
  ToneSpec spec;
  const AudioClip clip = render(spec);
  AudioClip padded = clip;
  const AudioClip tail = white_noise(10.0, 12);
  for (double s : tail.samples) padded.samples.push_back(s * 0.001);  // -60 dBFS

  const TrackFeatures base = track_features(clip, weights);
  const TrackFeatures with_tail = track_features(padded, weights);
  const double dn = std::abs(with_tail.noisiness_raw - base.noisiness_raw);
  const double dh = std::abs(with_tail.hr_inharmonicity_raw -
                             base.hr_inharmonicity_raw);
  std::printf("       |delta|: noisiness %.3g inharmonicity %.3g\n", dn, dh);
  c.check("|delta noisiness| < 1e-6", dn < 1e-6);
  c.check("|delta HR-inharmonicity| < 1e-6", dh < 1e-6);
}

TEST_CASE("13_pipeline_determinism") {
  Criterion c("13_pipeline_determinism",
              "extract output is byte-identical across parallelism levels",
              120.0);
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tonelab_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::ofstream manifest(dir / "manifest.csv");
  manifest << "track_id,path,dataset,year,artist,title,group_id\n";
  for (int i = 0; i < 20; ++i) {
    ToneSpec spec;
    spec.f0 = 100.0 + 37.0 * i;
    spec.n_partials = 3 + i % 9;
    spec.drop_above_nyquist = true;
    AudioClip clip = render(spec);
    if (i % 2) clip = add_noise(clip, 20.0 + i, 1300 + i);
    const std::string name = "track" + std::to_string(i) + ".wav";
    save_audio((dir / name).string(), clip, 16);
    manifest << "t" << i << "," << (dir / name).string() << ",synthetic,"
             << (1950 + i) << ",,,\n";
  }
  manifest.close();

  auto run = [&](int jobs, const std::string& out) {
    std::ostringstream cmd;
    cmd << TONELAB_CLI_PATH << " extract --manifest " << (dir / "manifest.csv")
        << " --out " << (dir / out) << " --cache-dir "
        << (dir / ("cache" + std::to_string(jobs))) << " --jobs " << jobs;
    return std::system(cmd.str().c_str());
  };
  const int rc1 = run(1, "serial.csv");
  const int rc8 = run(8, "parallel.csv");
  c.check("both runs exit 0", rc1 == 0 && rc8 == 0);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const std::string serial = slurp(dir / "serial.csv");
  const std::string parallel = slurp(dir / "parallel.csv");
  c.check("outputs are non-empty", !serial.empty());
  c.check("byte-identical CSVs", serial == parallel);
}
