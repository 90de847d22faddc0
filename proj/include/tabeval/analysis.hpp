#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabeval/corpus.hpp"
#include "tabeval/dataset.hpp"
#include "tabeval/error.hpp"

namespace tabeval {

// Product-moment correlation. Throws DegenerateInput for fewer than two
// points, mismatched lengths or a constant vector.
template <typename DX, typename DY>
double pearson(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  if (x.size() != y.size()) throw DegenerateInput("pearson: vectors differ in length");
  if (x.size() < 2) throw DegenerateInput("pearson: need at least two points");
  const Eigen::VectorXd xs = x.template cast<double>().reshaped();
  const Eigen::VectorXd ys = y.template cast<double>().reshaped();
  if ((xs.array() == xs(0)).all() || (ys.array() == ys(0)).all())
    throw DegenerateInput("pearson: zero variance");
  const Eigen::VectorXd dx = xs.array() - xs.mean();
  const Eigen::VectorXd dy = ys.array() - ys.mean();
  const double r = dx.dot(dy) / std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  return std::clamp(r, -1.0, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y);

enum class AlphaLevel { ordinal, interval };

std::string_view to_string(AlphaLevel level);
AlphaLevel alpha_level_from_string(std::string_view s);

// Krippendorff's alpha over a raters x items matrix; NaN marks a missing
// rating. Built from the value coincidence matrix, so items with fewer than
// two ratings drop out. Throws DegenerateInput without pairable values or
// with a single distinct value.
double krippendorff_alpha(const Eigen::MatrixXd& ratings, AlphaLevel level = AlphaLevel::ordinal);

enum class Dimension { correctness, completeness, overall };

std::string_view to_string(Dimension d);

struct CorrelationCell {
  std::string scope;   // model id, or "pooled"
  std::string metric;  // "tabeval" or a baseline key such as "chrf/triple"
  Dimension dimension = Dimension::overall;
  std::size_t n = 0;
  std::optional<double> r;  // absent when degenerate
  std::string note;
};

// Precision pairs with correctness, recall with completeness, F1 with overall.
struct CorrelationTable {
  std::vector<CorrelationCell> cells;

  std::optional<double> get(const std::string& scope, const std::string& metric, Dimension d) const;
};

inline constexpr const char* kPooledScope = "pooled";

// Averages each item's ratings over raters, then correlates per model and
// pooled. Throws MissingTable when a rated (model, table) has no report entry.
CorrelationTable correlate_report(std::span<const MetricReport> reports, std::span<const RatingRecord> ratings);

// Alpha per rating dimension, raters x (model, table) items.
std::map<Dimension, std::optional<double>> rater_agreement(std::span<const RatingRecord> ratings,
                                                           AlphaLevel level = AlphaLevel::ordinal);

struct ComparisonTable {
  std::vector<std::string> columns;
  std::vector<std::string> models;
  // values[model][column], macro score x 100; absent when the report lacks it.
  std::map<std::string, std::map<std::string, std::optional<double>>> values;
};

// Models as rows; baseline F1 (E, chrF, BS) and TabEval P/R/F1 as columns.
ComparisonTable model_comparison(const std::map<std::string, MetricReport>& reports);

nlohmann::json to_json(const CorrelationTable& table);
nlohmann::json to_json(const ComparisonTable& table);

std::string format_table(const CorrelationTable& table);
std::string format_table(const ComparisonTable& table);

}  // namespace tabeval
