#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tonelab/corpus.hpp"
#include "tonelab/features.hpp"
#include "tonelab/stats.hpp"
#include "tonelab/synth.hpp"
#include "tonelab/weighting.hpp"

namespace {

using namespace tonelab;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw corpus_error("cannot write output file: " + path);
  return out;
}

void write_experiment(const std::string& path, const ExperimentResult& res) {
  auto out = open_out(path);
  out << "x,median,p25,p75\n";
  for (std::size_t i = 0; i < res.x_axis.size(); ++i)
    out << fmt_g9(res.x_axis[i]) << "," << fmt_g9(res.median[i]) << ","
        << fmt_g9(res.p25[i]) << "," << fmt_g9(res.p75[i]) << "\n";
}

void write_curve(const std::string& path, const Curve& curve,
                 const char* header) {
  auto out = open_out(path);
  out << header << "\n";
  for (std::size_t i = 0; i < curve.x.size(); ++i)
    out << fmt_g9(curve.x[i]) << "," << fmt_g9(curve.y[i]) << "\n";
}

struct ExtractOptions {
  std::string manifest;
  std::string out;
  std::string cache_dir;
  std::size_t jobs = 1;
  double gate_db = -20.0;
  std::size_t frame = 2048;
  std::size_t hop = 1024;
  double f_min = 27.5;
  double phon = 50.0;
};

int run_extract(const ExtractOptions& opt) {
  FeatureConfig config;
  config.gate_db = opt.gate_db;
  config.frames.frame_length = opt.frame;
  config.frames.hop = opt.hop;
  config.band_f_min = opt.f_min;
  config.weight_phon = opt.phon;
  const WeightCurve weights = contour_to_weights(iso226_contour(opt.phon));

  const auto tracks = parse_manifest(opt.manifest);
  const auto rows =
      extract_features(tracks, config, weights, opt.cache_dir, opt.jobs);

  auto out = open_out(opt.out);
  out << feature_csv_header() << "\n";
  for (const auto& row : rows)
    if (row.features) out << feature_csv_row(row) << "\n";

  std::size_t failures = 0;
  for (const auto& row : rows)
    if (!row.error.empty()) ++failures;
  if (failures > 0) {
    auto err_out = open_out(opt.out + ".errors.csv");
    err_out << "track_id,path,error\n";
    for (const auto& row : rows)
      if (!row.error.empty())
        err_out << row.record.track_id << "," << row.record.path << ",\""
                << row.error << "\"\n";
    std::cerr << failures << " track(s) failed; see " << opt.out
              << ".errors.csv\n";
    return 2;
  }
  return 0;
}

struct FeaturePair {
  double noisiness;
  double inharmonicity;
};

FeaturePair pick_features(const TrackFeatures& f, bool weighted) {
  if (weighted) return {f.noisiness_weighted, f.hr_inharmonicity_weighted};
  return {f.noisiness_raw, f.hr_inharmonicity_raw};
}

int run_project(const std::string& in_path, const std::string& out_path,
                const std::string& projection_path, bool fit, bool weighted,
                double x_exp, double y_exp) {
  auto rows = read_feature_csv(in_path);

  Projection proj;
  bool have_proj = false;
  if (fit) {
    std::vector<double> noisiness, inharmonicity;
    for (const auto& row : rows)
      if (row.features) {
        const auto p = pick_features(*row.features, weighted);
        noisiness.push_back(p.noisiness);
        inharmonicity.push_back(p.inharmonicity);
      }
    if (!noisiness.empty()) {
      proj = fit_projection(noisiness, inharmonicity, x_exp, y_exp);
      have_proj = true;
      auto pout = open_out(projection_path);
      pout << projection_to_json(proj) << "\n";
    }
  } else {
    std::ifstream pin(projection_path);
    if (!pin) throw corpus_error("cannot open projection: " + projection_path);
    std::string text((std::istreambuf_iterator<char>(pin)),
                     std::istreambuf_iterator<char>());
    proj = projection_from_json(text);
    have_proj = true;
  }

  for (auto& row : rows)
    if (row.features && have_proj) {
      const auto p = pick_features(*row.features, weighted);
      const auto pc = project_point(proj, p.noisiness, p.inharmonicity);
      row.features->pc1 = pc[0];
      row.features->pc2 = pc[1];
    }

  auto out = open_out(out_path);
  out << feature_csv_header() << "\n";
  for (const auto& row : rows)
    if (row.features) out << feature_csv_row(row) << "\n";
  return 0;
}

std::string group_key_of(const TrackRecord& r, const std::string& group_by) {
  if (group_by == "year")
    return r.year ? std::to_string(*r.year) : std::string("unknown");
  if (group_by == "dataset") return r.dataset;
  if (group_by == "artist") return r.artist;
  throw corpus_error("unknown group key: " + group_by);
}

int run_report(const std::string& in_path, const std::string& group_by,
               const std::string& out_dir) {
  const auto rows = read_feature_csv(in_path);
  std::filesystem::create_directories(out_dir);

  std::vector<GroupedPoint> points;
  std::vector<double> all_pc1, all_pc2, all_noisiness, all_inharmonicity;
  for (const auto& row : rows) {
    if (!row.features || !row.features->pc1 || !row.features->pc2) continue;
    points.push_back({group_key_of(row.record, group_by), *row.features->pc1,
                      *row.features->pc2});
    all_pc1.push_back(*row.features->pc1);
    all_pc2.push_back(*row.features->pc2);
    all_noisiness.push_back(row.features->noisiness_raw);
    all_inharmonicity.push_back(row.features->hr_inharmonicity_raw);
  }
  if (points.empty())
    throw corpus_error("report: input has no projected rows (run project)");

  const auto summaries = group_summaries(points);
  const auto smoothed = smooth_centroid_curve(summaries);

  {
    auto out = open_out(out_dir + "/centroids.csv");
    out << "group,count,pc1,pc2,pc1_smooth,pc2_smooth\n";
    for (std::size_t i = 0; i < summaries.size(); ++i)
      out << summaries[i].key << "," << summaries[i].count << ","
          << fmt_g9(summaries[i].centroid[0]) << ","
          << fmt_g9(summaries[i].centroid[1]) << "," << fmt_g9(smoothed[i][0])
          << "," << fmt_g9(smoothed[i][1]) << "\n";
  }
  {
    auto out = open_out(out_dir + "/variance.csv");
    out << "group,count,variance_sum\n";
    for (const auto& g : summaries)
      out << g.key << "," << g.count << "," << fmt_g9(g.variance_sum) << "\n";
  }
  {
    auto out = open_out(out_dir + "/medians.csv");
    out << "group,count,pc1_median,pc1_iqr,pc2_median,pc2_iqr\n";
    std::map<std::string, std::vector<std::array<double, 2>>> groups;
    for (const auto& p : points) groups[p.key].push_back({p.pc1, p.pc2});
    for (const auto& [key, pts] : groups) {
      std::vector<double> v1, v2;
      for (const auto& p : pts) {
        v1.push_back(p[0]);
        v2.push_back(p[1]);
      }
      auto stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const auto q = [&](double p) {
          const double pos = p * static_cast<double>(v.size() - 1);
          const std::size_t lo = static_cast<std::size_t>(pos);
          const std::size_t hi = std::min(lo + 1, v.size() - 1);
          const double t = pos - static_cast<double>(lo);
          return (1.0 - t) * v[lo] + t * v[hi];
        };
        return std::array<double, 2>{q(0.5), q(0.75) - q(0.25)};
      };
      const auto s1 = stats(v1);
      const auto s2 = stats(v2);
      out << key << "," << pts.size() << "," << fmt_g9(s1[0]) << ","
          << fmt_g9(s1[1]) << "," << fmt_g9(s2[0]) << "," << fmt_g9(s2[1])
          << "\n";
    }
  }
  {
    auto out = open_out(out_dir + "/percentiles.csv");
    out << "percentile,pc1,pc2\n";
    const auto c1 = percentile_curve(all_pc1);
    const auto c2 = percentile_curve(all_pc2);
    for (std::size_t i = 0; i < c1.size(); ++i)
      out << c1[i].first << "," << fmt_g9(c1[i].second) << ","
          << fmt_g9(c2[i].second) << "\n";
  }
  if (all_noisiness.size() >= 20) {
    auto out = open_out(out_dir + "/median_curve.csv");
    out << "noisiness,inharmonicity_median\n";
    for (const auto& [x, y] : conditional_median(all_noisiness,
                                                 all_inharmonicity))
      out << fmt_g9(x) << "," << fmt_g9(y) << "\n";
  }
  {
    auto out = open_out(out_dir + "/contours.csv");
    out << "group,contour,vertex,pc1,pc2\n";
    std::map<std::string, std::vector<std::array<double, 2>>> groups;
    for (const auto& p : points) groups[p.key].push_back({p.pc1, p.pc2});
    for (const auto& [key, pts] : groups) {
      if (pts.size() < 10) {
        std::cerr << "report: group '" << key
                  << "' has fewer than 10 tracks; contour skipped\n";
        continue;
      }
      const auto polys = density_contour(pts);
      for (std::size_t c = 0; c < polys.size(); ++c)
        for (std::size_t v = 0; v < polys[c].size(); ++v)
          out << key << "," << c << "," << v << "," << fmt_g9(polys[c][v][0])
              << "," << fmt_g9(polys[c][v][1]) << "\n";
    }
  }
  return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path,
                const std::string& out_path) {
  const auto res =
      compare_tables(read_feature_csv(a_path), read_feature_csv(b_path));
  auto out = open_out(out_path);
  out << "group_id,d_hr_inharmonicity_raw,d_noisiness_raw,"
         "d_hr_inharmonicity_weighted,d_noisiness_weighted\n";
  for (const auto& p : res.pairs)
    out << p.group_id << "," << fmt_g9(p.d_hr_raw) << ","
        << fmt_g9(p.d_noisiness_raw) << "," << fmt_g9(p.d_hr_weighted) << ","
        << fmt_g9(p.d_noisiness_weighted) << "\n";

  std::cout << "pairs: " << res.pairs.size() << "\n"
            << "median_abs_hr_inharmonicity_raw: "
            << fmt_g9(res.median_abs_hr_raw) << "\n"
            << "median_abs_noisiness_raw: "
            << fmt_g9(res.median_abs_noisiness_raw) << "\n"
            << "median_abs_hr_inharmonicity_weighted: "
            << fmt_g9(res.median_abs_hr_weighted) << "\n"
            << "median_abs_noisiness_weighted: "
            << fmt_g9(res.median_abs_noisiness_weighted) << "\n";
  if (!res.unmatched.empty()) {
    std::cerr << res.unmatched.size() << " unmatched group(s):";
    for (const auto& g : res.unmatched) std::cerr << " " << g;
    std::cerr << "\n";
    return 2;
  }
  return 0;
}

struct SynthOptions {
  std::string name;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t trials = 0;  // 0 = experiment default
  double s = 0.8;
  double f0 = 220.0;
  std::string scale_case = "continuous";
  std::size_t partial_index = 4;
  std::size_t steps = 200;
};

int run_synth(const SynthOptions& opt) {
  std::cout << "seed: " << opt.seed << "\n";
  if (opt.name == "inharmonic-partials") {
    write_experiment(opt.out, experiment_inharmonic_partials(
                                  opt.s, opt.trials ? opt.trials : 50,
                                  opt.seed, opt.f0));
  } else if (opt.name == "shift-partial") {
    write_curve(opt.out,
                experiment_shift_partial(opt.partial_index, opt.steps, opt.f0),
                "freq_hz,hr");
  } else if (opt.name == "two-sine") {
    write_curve(opt.out, experiment_two_sine(opt.f0), "cents,hr");
  } else if (opt.name == "scales") {
    ScaleCase sc;
    if (opt.scale_case == "continuous") sc = ScaleCase::continuous;
    else if (opt.scale_case == "chromatic") sc = ScaleCase::chromatic_et;
    else if (opt.scale_case == "triad-et") sc = ScaleCase::triad_et;
    else if (opt.scale_case == "triad-just") sc = ScaleCase::triad_just;
    else throw corpus_error("unknown scale case: " + opt.scale_case);
    write_experiment(opt.out, experiment_scales(
                                  sc, 10, opt.trials ? opt.trials : 500,
                                  opt.seed));
  } else if (opt.name == "pairwise") {
    ToneSpec a, b;
    a.f0 = opt.f0;
    b.f0 = opt.f0 * std::pow(2.0, 3.0 / 12.0);  // 3 ET semitones up
    const auto m = pairwise_partial_matrix(a, b);
    auto out = open_out(opt.out);
    out << "freq";
    for (double f : m.freqs) out << "," << fmt_g9(f);
    out << "\n";
    for (std::size_t i = 0; i < m.freqs.size(); ++i) {
      out << fmt_g9(m.freqs[i]);
      for (std::size_t j = 0; j < m.freqs.size(); ++j)
        out << "," << fmt_g9(m.hr[i][j]);
      out << "\n";
    }
  } else if (opt.name == "beating") {
    const auto map = beating_map(opt.f0);
    auto out = open_out(opt.out);
    out << "cents";
    for (double f : map.env_freqs) out << "," << fmt_g9(f);
    out << "\n";
    for (std::size_t i = 0; i < map.interval_cents.size(); ++i) {
      out << fmt_g9(map.interval_cents[i]);
      for (double p : map.env_power[i]) out << "," << fmt_g9(p);
      out << "\n";
    }
    write_curve(opt.out + ".hr.csv", map.hr, "cents,hr");
  } else if (opt.name == "noise-vs-sines") {
    const auto res =
        experiment_noise_vs_sines(opt.trials ? opt.trials : 200, opt.seed);
    write_experiment(opt.out, res.sines);
    write_curve(opt.out + ".noise.csv", res.noise, "snr_db,hr");
  } else {
    throw corpus_error("unknown experiment: " + opt.name);
  }
  return 0;
}

int run_weights(const std::string& out_path, double phon) {
  const auto contour = iso226_contour(phon);
  const auto weights = contour_to_weights(contour);
  auto out = open_out(out_path);
  out << "freq_hz,gain_db,gain_linear\n";
  for (std::size_t i = 0; i < weights.freqs.size(); ++i)
    out << fmt_g9(weights.freqs[i]) << ","
        << fmt_g9(20.0 * std::log10(weights.linear_gain[i])) << ","
        << fmt_g9(weights.linear_gain[i]) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus-scale inharmonicity and noisiness analysis"};
  app.require_subcommand(1);

  ExtractOptions ext;
  if (const char* env = std::getenv("TONELAB_CACHE_DIR")) ext.cache_dir = env;
  auto* extract = app.add_subcommand("extract", "Extract per-track features");
  extract->add_option("--manifest", ext.manifest, "CSV or JSON manifest")
      ->required();
  extract->add_option("--out", ext.out, "Output feature CSV")->required();
  extract->add_option("--cache-dir", ext.cache_dir,
                      "Feature cache directory (also: TONELAB_CACHE_DIR)");
  extract->add_option("--jobs", ext.jobs, "Parallel workers");
  extract->add_option("--gate-db", ext.gate_db, "Gate threshold, dBFS");
  extract->add_option("--frame", ext.frame, "Analysis frame, samples");
  extract->add_option("--hop", ext.hop, "Frame hop, samples");
  extract->add_option("--fmin", ext.f_min, "Lowest band frequency, Hz");
  extract->add_option("--phon", ext.phon, "Loudness-contour level");

  std::string proj_in, proj_out, proj_file;
  bool proj_fit = false, proj_weighted = false, proj_raw = false;
  double x_exp = 0.18, y_exp = 0.21;
  auto* project = app.add_subcommand("project", "Fit or apply the projection");
  project->add_option("--in", proj_in, "Feature CSV")->required();
  project->add_option("--out", proj_out, "Output CSV with pc1/pc2")->required();
  project->add_option("--projection", proj_file, "Projection JSON")->required();
  project->add_flag("--fit", proj_fit, "Fit on the input and save");
  project->add_flag("--weighted", proj_weighted, "Use weighted features");
  project->add_flag("--raw", proj_raw, "Use raw features (default)");
  project->add_option("--x-exp", x_exp, "Noisiness skew exponent");
  project->add_option("--y-exp", y_exp, "Inharmonicity skew exponent");

  std::string rep_in, rep_group = "dataset", rep_dir;
  auto* report = app.add_subcommand("report", "Grouped corpus summaries");
  report->add_option("--in", rep_in, "Projected feature CSV")->required();
  report->add_option("--group-by", rep_group, "year | dataset | artist");
  report->add_option("--out-dir", rep_dir, "Report directory")->required();

  std::string cmp_a, cmp_b, cmp_out;
  auto* compare = app.add_subcommand("compare", "Paired feature differences");
  compare->add_option("--a", cmp_a, "First feature CSV")->required();
  compare->add_option("--b", cmp_b, "Second feature CSV")->required();
  compare->add_option("--out", cmp_out, "Pairwise delta CSV")->required();

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Synthetic-tone experiments");
  synth
      ->add_option("name", syn.name,
                   "inharmonic-partials | shift-partial | two-sine | scales | "
                   "pairwise | beating | noise-vs-sines")
      ->required();
  synth->add_option("--out", syn.out, "Output CSV")->required();
  synth->add_option("--seed", syn.seed, "RNG seed");
  synth->add_option("--trials", syn.trials, "Trials per sweep point");
  synth->add_option("--s", syn.s, "Partial amplitude decay");
  synth->add_option("--f0", syn.f0, "Fundamental, Hz");
  synth->add_option("--case", syn.scale_case,
                    "continuous | chromatic | triad-et | triad-just");
  synth->add_option("--partial-index", syn.partial_index, "Shifted partial");
  synth->add_option("--steps", syn.steps, "Sweep steps");

  std::string w_out;
  double w_phon = 50.0;
  auto* weights = app.add_subcommand("weights", "Emit the weighting table");
  weights->add_option("--out", w_out, "Output CSV")->required();
  weights->add_option("--phon", w_phon, "Loudness-contour level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) return run_extract(ext);
    if (project->parsed())
      return run_project(proj_in, proj_out, proj_file, proj_fit,
                         proj_weighted && !proj_raw, x_exp, y_exp);
    if (report->parsed()) return run_report(rep_in, rep_group, rep_dir);
    if (compare->parsed()) return run_compare(cmp_a, cmp_b, cmp_out);
    if (synth->parsed()) return run_synth(syn);
    if (weights->parsed()) return run_weights(w_out, w_phon);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
