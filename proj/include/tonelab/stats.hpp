#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tonelab {

class stats_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Power-transform-then-standardize parameters. The transform is
/// t(x) = ((x + offset)^exponent - median) / iqr; offset shifts data whose
/// natural range dips below zero (fractional exponents need nonnegative
/// inputs) and is recorded so the transform is portable.
struct SkewNormalizeParams {
  double exponent = 1.0;
  double offset = 0.0;
  double median = 0.0;
  double iqr = 1.0;
};

SkewNormalizeParams fit_skew_normalize(const std::vector<double>& values,
                                       double exponent, double offset = 0.0);
double skew_apply(const SkewNormalizeParams& p, double x);
double skew_invert(const SkewNormalizeParams& p, double t);

/// 2-D PCA basis with deterministic sign conventions: rows of `components`
/// are PC1 and PC2; PC1 has nonnegative dot product with (1,1)/sqrt(2), PC2
/// with (-1,1)/sqrt(2); variance[0] >= variance[1].
struct Pca2 {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<std::array<double, 2>, 2> components{{{1.0, 0.0}, {0.0, 1.0}}};
  std::array<double, 2> variance{0.0, 0.0};
};

Pca2 fit_pca2(const std::vector<std::array<double, 2>>& points);
std::array<double, 2> pca_project(const Pca2& pca,
                                  const std::array<double, 2>& point);
std::array<double, 2> pca_unproject(const Pca2& pca,
                                    const std::array<double, 2>& pc);

/// Full normalization + rotation pipeline for the (noisiness,
/// inharmonicity) plane. Axis order is (noisiness, inharmonicity).
struct Projection {
  SkewNormalizeParams x_params;  // noisiness
  SkewNormalizeParams y_params;  // HR-inharmonicity
  Pca2 pca;
};

Projection fit_projection(const std::vector<double>& noisiness,
                          const std::vector<double>& inharmonicity,
                          double x_exponent, double y_exponent);
std::array<double, 2> project_point(const Projection& proj, double noisiness,
                                    double inharmonicity);
std::array<double, 2> unproject_point(const Projection& proj,
                                      const std::array<double, 2>& pc);

std::string projection_to_json(const Projection& proj);
Projection projection_from_json(const std::string& text);

struct GroupSummary {
  std::string key;
  std::array<double, 2> centroid{0.0, 0.0};
  double variance_sum = 0.0;
  std::size_t count = 0;
};

struct GroupedPoint {
  std::string key;
  double pc1 = 0.0;
  double pc2 = 0.0;
};

/// Per-group centroid and var(pc1)+var(pc2), ordered by key.
std::vector<GroupSummary> group_summaries(
    const std::vector<GroupedPoint>& records);

/// Centered moving average of the centroids over the ordered group keys;
/// windows are truncated at the ends rather than padded.
std::vector<std::array<double, 2>> smooth_centroid_curve(
    const std::vector<GroupSummary>& summaries, std::size_t window = 5);

/// Linear-interpolated empirical quantiles at percentiles 1..99.
std::vector<std::pair<int, double>> percentile_curve(
    const std::vector<double>& values);

/// Median of y within each of `bins` equal-population bins of x; returns
/// (bin median x, median y) pairs.
std::vector<std::pair<double, double>> conditional_median(
    const std::vector<double>& x, const std::vector<double>& y,
    std::size_t bins = 20);

/// Half-height isolines of the mean-filtered 2-D histogram. Each polygon is a
/// chained polyline of (x, y) vertices; closed loops repeat the first vertex.
std::vector<std::vector<std::array<double, 2>>> density_contour(
    const std::vector<std::array<double, 2>>& points,
    std::size_t grid_resolution = 64, std::size_t smoothing_window = 3);

}  // namespace tonelab
