#include "tonelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

#include <json.hpp>

namespace tonelab {

namespace {

double percentile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return (1.0 - t) * sorted[lo] + t * sorted[hi];
}

double median_sorted(const std::vector<double>& sorted) {
  return percentile_sorted(sorted, 50.0);
}

}  // namespace

SkewNormalizeParams fit_skew_normalize(const std::vector<double>& values,
                                       double exponent, double offset) {
  if (values.size() < 2)
    throw stats_error("fit_skew_normalize: need >= 2 values");
  if (!(exponent > 0.0))
    throw stats_error("fit_skew_normalize: exponent must be positive");
  std::vector<double> t;
  t.reserve(values.size());
  for (double v : values) {
    const double shifted = v + offset;
    if (shifted < 0.0)
      throw stats_error("fit_skew_normalize: negative value after offset");
    t.push_back(std::pow(shifted, exponent));
  }
  std::sort(t.begin(), t.end());
  SkewNormalizeParams p;
  p.exponent = exponent;
  p.offset = offset;
  p.median = median_sorted(t);
  p.iqr = percentile_sorted(t, 75.0) - percentile_sorted(t, 25.0);
  if (p.iqr <= 0.0) throw stats_error("fit_skew_normalize: zero IQR");
  return p;
}

double skew_apply(const SkewNormalizeParams& p, double x) {
  return (std::pow(x + p.offset, p.exponent) - p.median) / p.iqr;
}

double skew_invert(const SkewNormalizeParams& p, double t) {
  return std::pow(t * p.iqr + p.median, 1.0 / p.exponent) - p.offset;
}

Pca2 fit_pca2(const std::vector<std::array<double, 2>>& points) {
  if (points.size() < 3) throw stats_error("fit_pca2: need >= 3 points");
  const double n = static_cast<double>(points.size());
  Pca2 out;
  for (const auto& p : points) {
    out.mean[0] += p[0];
    out.mean[1] += p[1];
  }
  out.mean[0] /= n;
  out.mean[1] /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = p[0] - out.mean[0];
    const double dy = p[1] - out.mean[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  sxx /= n;
  sxy /= n;
  syy /= n;
  if (sxx + syy <= 0.0) throw stats_error("fit_pca2: degenerate covariance");

  const double tr = sxx + syy;
  const double gap = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
  const double l1 = 0.5 * (tr + gap);
  const double l2 = 0.5 * (tr - gap);

  std::array<double, 2> v1;
  if (std::abs(sxy) > 1e-300) {
    v1 = {l1 - syy, sxy};
  } else {
    v1 = sxx >= syy ? std::array<double, 2>{1.0, 0.0}
                    : std::array<double, 2>{0.0, 1.0};
  }
  const double norm = std::hypot(v1[0], v1[1]);
  v1[0] /= norm;
  v1[1] /= norm;
  std::array<double, 2> v2{-v1[1], v1[0]};

  // Sign conventions make the fit unique: PC1 points toward (1,1)/sqrt(2),
  // PC2 toward (-1,1)/sqrt(2).
  if (v1[0] + v1[1] < 0.0) {
    v1[0] = -v1[0];
    v1[1] = -v1[1];
  }
  if (v2[1] - v2[0] < 0.0) {
    v2[0] = -v2[0];
    v2[1] = -v2[1];
  }
  out.components = {v1, v2};
  out.variance = {l1, std::max(l2, 0.0)};
  return out;
}

std::array<double, 2> pca_project(const Pca2& pca,
                                  const std::array<double, 2>& point) {
  const double dx = point[0] - pca.mean[0];
  const double dy = point[1] - pca.mean[1];
  return {pca.components[0][0] * dx + pca.components[0][1] * dy,
          pca.components[1][0] * dx + pca.components[1][1] * dy};
}

std::array<double, 2> pca_unproject(const Pca2& pca,
                                    const std::array<double, 2>& pc) {
  return {pca.mean[0] + pca.components[0][0] * pc[0] +
              pca.components[1][0] * pc[1],
          pca.mean[1] + pca.components[0][1] * pc[0] +
              pca.components[1][1] * pc[1]};
}

Projection fit_projection(const std::vector<double>& noisiness,
                          const std::vector<double>& inharmonicity,
                          double x_exponent, double y_exponent) {
  if (noisiness.size() != inharmonicity.size())
    throw stats_error("fit_projection: mismatched input lengths");
  Projection proj;
  // Noisiness is nonpositive by construction; shift by the corpus minimum so
  // the power transform sees nonnegative inputs.
  const double min_n = *std::min_element(noisiness.begin(), noisiness.end());
  proj.x_params =
      fit_skew_normalize(noisiness, x_exponent, min_n < 0.0 ? -min_n : 0.0);
  proj.y_params = fit_skew_normalize(inharmonicity, y_exponent, 0.0);

  std::vector<std::array<double, 2>> pts;
  pts.reserve(noisiness.size());
  for (std::size_t i = 0; i < noisiness.size(); ++i)
    pts.push_back({skew_apply(proj.x_params, noisiness[i]),
                   skew_apply(proj.y_params, inharmonicity[i])});
  proj.pca = fit_pca2(pts);
  return proj;
}

std::array<double, 2> project_point(const Projection& proj, double noisiness,
                                    double inharmonicity) {
  return pca_project(proj.pca, {skew_apply(proj.x_params, noisiness),
                                skew_apply(proj.y_params, inharmonicity)});
}

std::array<double, 2> unproject_point(const Projection& proj,
                                      const std::array<double, 2>& pc) {
  const auto norm = pca_unproject(proj.pca, pc);
  return {skew_invert(proj.x_params, norm[0]),
          skew_invert(proj.y_params, norm[1])};
}

std::string projection_to_json(const Projection& proj) {
  nlohmann::json j;
  auto params = [](const SkewNormalizeParams& p) {
    return nlohmann::json{{"exponent", p.exponent},
                          {"offset", p.offset},
                          {"median", p.median},
                          {"iqr", p.iqr}};
  };
  j["x_params"] = params(proj.x_params);
  j["y_params"] = params(proj.y_params);
  j["mean"] = proj.pca.mean;
  j["components"] = proj.pca.components;
  j["variance"] = proj.pca.variance;
  return j.dump(2);
}

Projection projection_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw stats_error(std::string("projection_from_json: ") + e.what());
  }
  auto params = [](const nlohmann::json& pj) {
    SkewNormalizeParams p;
    p.exponent = pj.at("exponent").get<double>();
    p.offset = pj.at("offset").get<double>();
    p.median = pj.at("median").get<double>();
    p.iqr = pj.at("iqr").get<double>();
    return p;
  };
  try {
    Projection proj;
    proj.x_params = params(j.at("x_params"));
    proj.y_params = params(j.at("y_params"));
    proj.pca.mean = j.at("mean").get<std::array<double, 2>>();
    proj.pca.components =
        j.at("components").get<std::array<std::array<double, 2>, 2>>();
    proj.pca.variance = j.at("variance").get<std::array<double, 2>>();
    return proj;
  } catch (const nlohmann::json::exception& e) {
    throw stats_error(std::string("projection_from_json: ") + e.what());
  }
}

std::vector<GroupSummary> group_summaries(
    const std::vector<GroupedPoint>& records) {
  std::map<std::string, std::vector<std::array<double, 2>>> groups;
  for (const auto& r : records) groups[r.key].push_back({r.pc1, r.pc2});

  std::vector<GroupSummary> out;
  for (const auto& [key, pts] : groups) {
    GroupSummary g;
    g.key = key;
    g.count = pts.size();
    for (const auto& p : pts) {
      g.centroid[0] += p[0];
      g.centroid[1] += p[1];
    }
    const double n = static_cast<double>(pts.size());
    g.centroid[0] /= n;
    g.centroid[1] /= n;
    for (const auto& p : pts) {
      const double dx = p[0] - g.centroid[0];
      const double dy = p[1] - g.centroid[1];
      g.variance_sum += dx * dx + dy * dy;
    }
    g.variance_sum /= n;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::array<double, 2>> smooth_centroid_curve(
    const std::vector<GroupSummary>& summaries, std::size_t window) {
  if (window == 0) throw stats_error("smooth_centroid_curve: zero window");
  const std::size_t n = summaries.size();
  const std::size_t half = window / 2;
  std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    for (std::size_t k = lo; k < hi; ++k) {
      out[i][0] += summaries[k].centroid[0];
      out[i][1] += summaries[k].centroid[1];
    }
    out[i][0] /= static_cast<double>(hi - lo);
    out[i][1] /= static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<std::pair<int, double>> percentile_curve(
    const std::vector<double>& values) {
  if (values.size() < 2) throw stats_error("percentile_curve: need >= 2 values");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<int, double>> out;
  out.reserve(99);
  for (int q = 1; q <= 99; ++q)
    out.emplace_back(q, percentile_sorted(sorted, q));
  return out;
}

std::vector<std::pair<double, double>> conditional_median(
    const std::vector<double>& x, const std::vector<double>& y,
    std::size_t bins) {
  if (x.size() != y.size() || x.size() < bins)
    throw stats_error("conditional_median: need >= bins paired values");
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<std::pair<double, double>> out;
  const std::size_t n = x.size();
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * n / bins;
    const std::size_t hi = (b + 1) * n / bins;
    std::vector<double> xs, ys;
    for (std::size_t i = lo; i < hi; ++i) {
      xs.push_back(x[order[i]]);
      ys.push_back(y[order[i]]);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    out.emplace_back(median_sorted(xs), median_sorted(ys));
  }
  return out;
}

namespace {

struct Segment {
  std::array<double, 2> a;
  std::array<double, 2> b;
};

std::uint64_t quantize_key(const std::array<double, 2>& p, double cell) {
  const auto qx = static_cast<std::int64_t>(std::llround(p[0] / cell * 16.0));
  const auto qy = static_cast<std::int64_t>(std::llround(p[1] / cell * 16.0));
  return (static_cast<std::uint64_t>(qx) << 32) ^
         (static_cast<std::uint64_t>(qy) & 0xFFFFFFFFULL);
}

}  // namespace

std::vector<std::vector<std::array<double, 2>>> density_contour(
    const std::vector<std::array<double, 2>>& points,
    std::size_t grid_resolution, std::size_t smoothing_window) {
  if (points.size() < 10) throw stats_error("density_contour: need >= 10 points");
  if (grid_resolution < 4) throw stats_error("density_contour: grid too small");

  double min_x = points[0][0], max_x = points[0][0];
  double min_y = points[0][1], max_y = points[0][1];
  for (const auto& p : points) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  // Pad one cell so contours can close around boundary mass.
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  min_x -= span_x / static_cast<double>(grid_resolution);
  max_x += span_x / static_cast<double>(grid_resolution);
  min_y -= span_y / static_cast<double>(grid_resolution);
  max_y += span_y / static_cast<double>(grid_resolution);

  const std::size_t n = grid_resolution;
  const double cw = (max_x - min_x) / static_cast<double>(n);
  const double ch = (max_y - min_y) / static_cast<double>(n);

  std::vector<double> hist(n * n, 0.0);
  for (const auto& p : points) {
    auto ix = static_cast<std::size_t>((p[0] - min_x) / cw);
    auto iy = static_cast<std::size_t>((p[1] - min_y) / ch);
    ix = std::min(ix, n - 1);
    iy = std::min(iy, n - 1);
    hist[iy * n + ix] += 1.0;
  }

  // Mean filter, window truncated at the borders.
  std::vector<double> smooth(n * n, 0.0);
  const std::size_t half = smoothing_window / 2;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t x0 = x >= half ? x - half : 0;
      const std::size_t y0 = y >= half ? y - half : 0;
      const std::size_t x1 = std::min(n, x + half + 1);
      const std::size_t y1 = std::min(n, y + half + 1);
      double acc = 0.0;
      for (std::size_t yy = y0; yy < y1; ++yy)
        for (std::size_t xx = x0; xx < x1; ++xx) acc += hist[yy * n + xx];
      smooth[y * n + x] = acc / static_cast<double>((x1 - x0) * (y1 - y0));
    }

  const double level = 0.5 * *std::max_element(smooth.begin(), smooth.end());
  if (level <= 0.0) throw stats_error("density_contour: empty grid");

  // Marching squares over cell-center samples.
  auto sample = [&](std::size_t x, std::size_t y) { return smooth[y * n + x]; };
  auto coord = [&](double x, double y) -> std::array<double, 2> {
    return {min_x + (x + 0.5) * cw, min_y + (y + 0.5) * ch};
  };
  auto lerp_pt = [&](std::size_t x0, std::size_t y0, std::size_t x1,
                     std::size_t y1) -> std::array<double, 2> {
    const double v0 = sample(x0, y0), v1 = sample(x1, y1);
    const double t = (level - v0) / (v1 - v0);
    return coord(static_cast<double>(x0) +
                     t * (static_cast<double>(x1) - static_cast<double>(x0)),
                 static_cast<double>(y0) +
                     t * (static_cast<double>(y1) - static_cast<double>(y0)));
  };

  std::vector<Segment> segments;
  for (std::size_t y = 0; y + 1 < n; ++y)
    for (std::size_t x = 0; x + 1 < n; ++x) {
      const bool b0 = sample(x, y) >= level;        // bottom-left
      const bool b1 = sample(x + 1, y) >= level;    // bottom-right
      const bool b2 = sample(x + 1, y + 1) >= level;  // top-right
      const bool b3 = sample(x, y + 1) >= level;    // top-left
      const int code = (b0 ? 1 : 0) | (b1 ? 2 : 0) | (b2 ? 4 : 0) | (b3 ? 8 : 0);
      if (code == 0 || code == 15) continue;
      const auto bottom = [&] { return lerp_pt(x, y, x + 1, y); };
      const auto right = [&] { return lerp_pt(x + 1, y, x + 1, y + 1); };
      const auto top = [&] { return lerp_pt(x, y + 1, x + 1, y + 1); };
      const auto left = [&] { return lerp_pt(x, y, x, y + 1); };
      switch (code) {
        case 1: case 14: segments.push_back({left(), bottom()}); break;
        case 2: case 13: segments.push_back({bottom(), right()}); break;
        case 3: case 12: segments.push_back({left(), right()}); break;
        case 4: case 11: segments.push_back({right(), top()}); break;
        case 6: case 9: segments.push_back({bottom(), top()}); break;
        case 7: case 8: segments.push_back({left(), top()}); break;
        case 5:
          segments.push_back({left(), top()});
          segments.push_back({bottom(), right()});
          break;
        case 10:
          segments.push_back({left(), bottom()});
          segments.push_back({right(), top()});
          break;
        default: break;
      }
    }

  // Chain segments into polylines by endpoint matching.
  const double cell = std::min(cw, ch);
  std::multimap<std::uint64_t, std::size_t> by_endpoint;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    by_endpoint.emplace(quantize_key(segments[i].a, cell), i);
    by_endpoint.emplace(quantize_key(segments[i].b, cell), i);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<std::array<double, 2>>> polygons;
  for (std::size_t start = 0; start < segments.size(); ++start) {
    if (used[start]) continue;
    used[start] = true;
    std::vector<std::array<double, 2>> poly{segments[start].a,
                                            segments[start].b};
    auto extend = [&](std::array<double, 2>& tip) {
      const auto key = quantize_key(tip, cell);
      auto [lo, hi] = by_endpoint.equal_range(key);
      for (auto it = lo; it != hi; ++it) {
        const std::size_t i = it->second;
        if (used[i]) continue;
        used[i] = true;
        tip = quantize_key(segments[i].a, cell) == key ? segments[i].b
                                                       : segments[i].a;
        return true;
      }
      return false;
    };
    for (std::array<double, 2> tip = poly.back();;) {
      if (!extend(tip)) break;
      poly.push_back(tip);
    }
    std::reverse(poly.begin(), poly.end());
    for (std::array<double, 2> tip = poly.back();;) {
      if (!extend(tip)) break;
      poly.push_back(tip);
    }
    polygons.push_back(std::move(poly));
  }
  return polygons;
}

}  // namespace tonelab
