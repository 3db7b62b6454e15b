#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tonelab/features.hpp"

namespace tonelab {

class corpus_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrackRecord {
  std::string track_id;
  std::string path;
  std::string dataset;
  std::optional<int> year;
  std::string artist;
  std::string title;
  std::string group_id;
};

/// Per-track extraction outcome: features on success, a diagnostic on
/// failure. Rows stay in manifest order.
struct ExtractRow {
  TrackRecord record;
  std::optional<TrackFeatures> features;
  std::string error;
};

/// Manifest is either a CSV with a header row or a JSON array of objects;
/// recognized fields: track_id, path, dataset, year, artist, title, group_id.
std::vector<TrackRecord> parse_manifest(const std::string& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// One JSON file per (content hash, config key) under `dir`; writes are
/// atomic (temp file + rename). An empty dir disables caching.
class FeatureCache {
 public:
  explicit FeatureCache(std::string dir);
  std::optional<TrackFeatures> lookup(const std::string& content_hash,
                                      const std::string& config_key) const;
  void store(const std::string& content_hash, const std::string& config_key,
             const TrackFeatures& features) const;

 private:
  std::string entry_path(const std::string& content_hash,
                         const std::string& config_key) const;
  std::string dir_;
};

/// Cache-or-compute feature extraction over a manifest with a bounded worker
/// pool. Per-track failures land in the row's error field; the batch always
/// completes.
std::vector<ExtractRow> extract_features(const std::vector<TrackRecord>& tracks,
                                         const FeatureConfig& config,
                                         const WeightCurve& weights,
                                         const std::string& cache_dir,
                                         std::size_t jobs = 1);

/// Canonical float formatting for every CSV the tool emits (9 significant
/// digits).
std::string fmt_g9(double v);

std::string feature_csv_header();
std::string feature_csv_row(const ExtractRow& row);

/// Inverse of feature_csv_header/feature_csv_row: read a feature table back.
std::vector<ExtractRow> read_feature_csv(const std::string& path);

struct PairDelta {
  std::string group_id;
  double d_hr_raw = 0.0;
  double d_noisiness_raw = 0.0;
  double d_hr_weighted = 0.0;
  double d_noisiness_weighted = 0.0;
};

struct CompareResult {
  std::vector<PairDelta> pairs;
  std::vector<std::string> unmatched;  // group_ids present on one side only
  // Median of |delta| per feature, same order as PairDelta fields.
  double median_abs_hr_raw = 0.0;
  double median_abs_noisiness_raw = 0.0;
  double median_abs_hr_weighted = 0.0;
  double median_abs_noisiness_weighted = 0.0;
};

/// Pair rows by group_id (falling back to track_id when group_id is empty)
/// and summarize the per-feature differences.
CompareResult compare_tables(const std::vector<ExtractRow>& a,
                             const std::vector<ExtractRow>& b);

}  // namespace tonelab
