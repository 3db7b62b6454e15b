#include "tonelab/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "tonelab/wav.hpp"

namespace tonelab {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

TrackRecord record_from_fields(
    const std::map<std::string, std::string>& fields) {
  TrackRecord r;
  auto get = [&](const char* key) {
    auto it = fields.find(key);
    return it == fields.end() ? std::string() : it->second;
  };
  r.track_id = get("track_id");
  r.path = get("path");
  r.dataset = get("dataset");
  r.artist = get("artist");
  r.title = get("title");
  r.group_id = get("group_id");
  const std::string year = get("year");
  if (!year.empty()) {
    try {
      r.year = std::stoi(year);
    } catch (const std::exception&) {
      throw corpus_error("manifest: invalid year '" + year + "'");
    }
    if (*r.year < 1900 || *r.year > 2100)
      throw corpus_error("manifest: year out of range: " + year);
  }
  if (r.track_id.empty()) throw corpus_error("manifest: missing track_id");
  if (r.path.empty())
    throw corpus_error("manifest: missing path for track " + r.track_id);
  return r;
}

std::vector<TrackRecord> parse_manifest_json(const std::string& text,
                                             const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw corpus_error("manifest " + path + ": " + e.what());
  }
  if (!j.is_array()) throw corpus_error("manifest " + path + ": not an array");
  std::vector<TrackRecord> out;
  for (const auto& item : j) {
    if (!item.is_object())
      throw corpus_error("manifest " + path + ": array entry is not an object");
    std::map<std::string, std::string> fields;
    for (const auto& [key, value] : item.items()) {
      if (value.is_string()) fields[key] = value.get<std::string>();
      else if (value.is_number_integer())
        fields[key] = std::to_string(value.get<long long>());
      else if (!value.is_null())
        throw corpus_error("manifest " + path + ": field '" + key +
                           "' has unsupported type");
    }
    out.push_back(record_from_fields(fields));
  }
  return out;
}

std::vector<TrackRecord> parse_manifest_csv(std::istream& in,
                                            const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw corpus_error("manifest " + path + ": empty file");
  const auto header = split_csv_line(line);
  std::vector<TrackRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto values = split_csv_line(line);
    if (values.size() != header.size())
      throw corpus_error("manifest " + path + ": line " +
                         std::to_string(line_no) + " has " +
                         std::to_string(values.size()) + " fields, expected " +
                         std::to_string(header.size()));
    std::map<std::string, std::string> fields;
    for (std::size_t i = 0; i < header.size(); ++i)
      fields[header[i]] = values[i];
    out.push_back(record_from_fields(fields));
  }
  return out;
}

}  // namespace

std::vector<TrackRecord> parse_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw corpus_error("cannot open manifest: " + path);

  // Peek past whitespace: '[' means JSON, anything else CSV.
  char c = 0;
  while (in.get(c) && (c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
  }
  in.seekg(0);
  std::vector<TrackRecord> records;
  if (c == '[') {
    std::stringstream buf;
    buf << in.rdbuf();
    records = parse_manifest_json(buf.str(), path);
  } else {
    records = parse_manifest_csv(in, path);
  }

  std::map<std::string, std::size_t> seen;
  for (const auto& r : records)
    if (++seen[r.track_id] > 1)
      throw corpus_error("manifest " + path + ": duplicate track_id '" +
                         r.track_id + "'");
  return records;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw corpus_error("cannot open for hashing: " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw corpus_error("sha256 init failed");
  }
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    if (EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount())) != 1) {
      EVP_MD_CTX_free(ctx);
      throw corpus_error("sha256 update failed");
    }
    if (!in) break;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw corpus_error("sha256 final failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

std::string sha256_string(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, text.data(), text.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw corpus_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

constexpr const char* kToolVersion = "tonelab-1.0";

}  // namespace

FeatureCache::FeatureCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string FeatureCache::entry_path(const std::string& content_hash,
                                     const std::string& config_key) const {
  return dir_ + "/" + content_hash + "-" +
         sha256_string(config_key).substr(0, 16) + ".json";
}

std::optional<TrackFeatures> FeatureCache::lookup(
    const std::string& content_hash, const std::string& config_key) const {
  if (dir_.empty()) return std::nullopt;
  std::ifstream in(entry_path(content_hash, config_key));
  if (!in) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("content_hash").get<std::string>() != content_hash ||
        j.at("config_key").get<std::string>() != config_key)
      return std::nullopt;
    const auto& f = j.at("features");
    TrackFeatures feats;
    feats.hr_inharmonicity_raw = f.at("hr_inharmonicity_raw").get<double>();
    feats.noisiness_raw = f.at("noisiness_raw").get<double>();
    feats.hr_inharmonicity_weighted =
        f.at("hr_inharmonicity_weighted").get<double>();
    feats.noisiness_weighted = f.at("noisiness_weighted").get<double>();
    return feats;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // corrupt or stale entry: recompute
  }
}

void FeatureCache::store(const std::string& content_hash,
                         const std::string& config_key,
                         const TrackFeatures& features) const {
  if (dir_.empty()) return;
  nlohmann::json j;
  j["content_hash"] = content_hash;
  j["config_key"] = config_key;
  j["tool_version"] = kToolVersion;
  j["features"] = {
      {"hr_inharmonicity_raw", features.hr_inharmonicity_raw},
      {"noisiness_raw", features.noisiness_raw},
      {"hr_inharmonicity_weighted", features.hr_inharmonicity_weighted},
      {"noisiness_weighted", features.noisiness_weighted},
  };
  const std::string final_path = entry_path(content_hash, config_key);
  const std::string tmp_path =
      final_path + ".tmp." +
      std::to_string(
          std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) {
      std::filesystem::remove(tmp_path);
      return;  // failing to cache is not an extraction failure
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) std::filesystem::remove(tmp_path);
}

std::vector<ExtractRow> extract_features(const std::vector<TrackRecord>& tracks,
                                         const FeatureConfig& config,
                                         const WeightCurve& weights,
                                         const std::string& cache_dir,
                                         std::size_t jobs) {
  FeatureCache cache(cache_dir);
  const std::string config_key = config.config_key();
  std::vector<ExtractRow> rows(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) rows[i].record = tracks[i];

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tracks.size()) return;
      ExtractRow& row = rows[i];
      try {
        const std::string hash = sha256_file(row.record.path);
        if (auto cached = cache.lookup(hash, config_key)) {
          row.features = *cached;
          continue;
        }
        const AudioClip clip =
            prepare(load_audio(row.record.path), config.sample_rate);
        row.features = track_features(clip, weights, config);
        cache.store(hash, config_key, *row.features);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string fmt_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string feature_csv_header() {
  return "track_id,path,dataset,year,artist,title,group_id,"
         "hr_inharmonicity_raw,noisiness_raw,hr_inharmonicity_weighted,"
         "noisiness_weighted,pc1,pc2";
}

std::string feature_csv_row(const ExtractRow& row) {
  const auto& r = row.record;
  std::string out = csv_escape(r.track_id) + "," + csv_escape(r.path) + "," +
                    csv_escape(r.dataset) + "," +
                    (r.year ? std::to_string(*r.year) : std::string()) + "," +
                    csv_escape(r.artist) + "," + csv_escape(r.title) + "," +
                    csv_escape(r.group_id) + ",";
  if (row.features) {
    const auto& f = *row.features;
    out += fmt_g9(f.hr_inharmonicity_raw) + "," + fmt_g9(f.noisiness_raw) +
           "," + fmt_g9(f.hr_inharmonicity_weighted) + "," +
           fmt_g9(f.noisiness_weighted) + ",";
    out += f.pc1 ? fmt_g9(*f.pc1) : std::string();
    out += ",";
    out += f.pc2 ? fmt_g9(*f.pc2) : std::string();
  } else {
    out += ",,,,,";
  }
  return out;
}

std::vector<ExtractRow> read_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw corpus_error("cannot open feature table: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != split_csv_line(feature_csv_header()))
    throw corpus_error("feature table " + path + ": unexpected header");
  std::vector<ExtractRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13)
      throw corpus_error("feature table " + path + ": line " +
                         std::to_string(line_no) + " has " +
                         std::to_string(f.size()) + " fields, expected 13");
    ExtractRow row;
    row.record.track_id = f[0];
    row.record.path = f[1];
    row.record.dataset = f[2];
    if (!f[3].empty()) row.record.year = std::stoi(f[3]);
    row.record.artist = f[4];
    row.record.title = f[5];
    row.record.group_id = f[6];
    if (!f[7].empty()) {
      TrackFeatures feats;
      feats.hr_inharmonicity_raw = std::stod(f[7]);
      feats.noisiness_raw = std::stod(f[8]);
      feats.hr_inharmonicity_weighted = std::stod(f[9]);
      feats.noisiness_weighted = std::stod(f[10]);
      if (!f[11].empty()) feats.pc1 = std::stod(f[11]);
      if (!f[12].empty()) feats.pc2 = std::stod(f[12]);
      row.features = feats;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CompareResult compare_tables(const std::vector<ExtractRow>& a,
                             const std::vector<ExtractRow>& b) {
  auto key_of = [](const ExtractRow& r) {
    return r.record.group_id.empty() ? r.record.track_id : r.record.group_id;
  };
  std::map<std::string, const ExtractRow*> index_b;
  for (const auto& row : b)
    if (row.features) index_b[key_of(row)] = &row;

  CompareResult res;
  std::vector<double> d0, d1, d2, d3;
  std::map<std::string, bool> matched_b;
  for (const auto& row : a) {
    if (!row.features) continue;
    const std::string key = key_of(row);
    auto it = index_b.find(key);
    if (it == index_b.end()) {
      res.unmatched.push_back(key);
      continue;
    }
    matched_b[key] = true;
    const auto& fa = *row.features;
    const auto& fb = *it->second->features;
    PairDelta d;
    d.group_id = key;
    d.d_hr_raw = fb.hr_inharmonicity_raw - fa.hr_inharmonicity_raw;
    d.d_noisiness_raw = fb.noisiness_raw - fa.noisiness_raw;
    d.d_hr_weighted = fb.hr_inharmonicity_weighted - fa.hr_inharmonicity_weighted;
    d.d_noisiness_weighted = fb.noisiness_weighted - fa.noisiness_weighted;
    res.pairs.push_back(d);
    d0.push_back(std::abs(d.d_hr_raw));
    d1.push_back(std::abs(d.d_noisiness_raw));
    d2.push_back(std::abs(d.d_hr_weighted));
    d3.push_back(std::abs(d.d_noisiness_weighted));
  }
  for (const auto& [key, row] : index_b)
    if (!matched_b.count(key)) res.unmatched.push_back(key);

  auto med = [](std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  res.median_abs_hr_raw = med(d0);
  res.median_abs_noisiness_raw = med(d1);
  res.median_abs_hr_weighted = med(d2);
  res.median_abs_noisiness_weighted = med(d3);
  return res;
}

}  // namespace tonelab
