#include "tabeval/analysis.hpp"

#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

namespace tabeval {

using nlohmann::json;

double pearson(std::span<const double> x, std::span<const double> y) {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  return pearson(xv, yv);
}

std::string_view to_string(AlphaLevel level) { return level == AlphaLevel::ordinal ? "ordinal" : "interval"; }

AlphaLevel alpha_level_from_string(std::string_view s) {
  if (s == "ordinal") return AlphaLevel::ordinal;
  if (s == "interval") return AlphaLevel::interval;
  throw ConfigError("unknown alpha level: " + std::string(s));
}

double krippendorff_alpha(const Eigen::MatrixXd& ratings, AlphaLevel level) {
  std::set<double> distinct;
  for (Eigen::Index u = 0; u < ratings.cols(); ++u) {
    const auto col = ratings.col(u);
    if ((col.array() == col.array()).count() < 2) continue;
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (!std::isnan(col(i))) distinct.insert(col(i));
  }
  if (distinct.empty()) throw DegenerateInput("krippendorff_alpha: no pairable values");
  if (distinct.size() < 2) throw DegenerateInput("krippendorff_alpha: only one distinct value");

  const std::vector<double> values(distinct.begin(), distinct.end());
  const auto k = static_cast<Eigen::Index>(values.size());
  auto index_of = [&](double v) {
    return static_cast<Eigen::Index>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  };

  Eigen::MatrixXd coincidence = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index u = 0; u < ratings.cols(); ++u) {
    std::vector<Eigen::Index> present;
    for (Eigen::Index i = 0; i < ratings.rows(); ++i)
      if (!std::isnan(ratings(i, u))) present.push_back(index_of(ratings(i, u)));
    const auto m = present.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (a != b) coincidence(present[a], present[b]) += w;
  }
  const Eigen::VectorXd marginals = coincidence.rowwise().sum();
  const double n = marginals.sum();

  Eigen::MatrixXd delta2(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index e = 0; e < k; ++e) {
      if (level == AlphaLevel::interval) {
        const double d = values[static_cast<std::size_t>(c)] - values[static_cast<std::size_t>(e)];
        delta2(c, e) = d * d;
      } else {
        const auto lo = std::min(c, e), hi = std::max(c, e);
        const double d = marginals.segment(lo, hi - lo + 1).sum() - (marginals(c) + marginals(e)) / 2.0;
        delta2(c, e) = d * d;
      }
    }
  }
  const double observed = coincidence.cwiseProduct(delta2).sum();
  const double expected = (marginals * marginals.transpose()).cwiseProduct(delta2).sum();
  if (expected == 0.0) throw DegenerateInput("krippendorff_alpha: zero expected disagreement");
  return 1.0 - (n - 1.0) * observed / expected;
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::correctness:
      return "correctness";
    case Dimension::completeness:
      return "completeness";
    case Dimension::overall:
      return "overall";
  }
  return "?";
}

std::optional<double> CorrelationTable::get(const std::string& scope, const std::string& metric,
                                            Dimension d) const {
  for (const auto& c : cells)
    if (c.scope == scope && c.metric == metric && c.dimension == d) return c.r;
  return std::nullopt;
}

namespace {

constexpr Dimension kDimensions[] = {Dimension::correctness, Dimension::completeness, Dimension::overall};

struct HumanScore {
  double sum[3] = {0, 0, 0};
  int raters = 0;

  double mean(Dimension d) const { return sum[static_cast<int>(d)] / raters; }
};

// Metric value paired with a dimension: P with correctness, R with
// completeness, F1 with overall.
double metric_value(const TableEntry& e, const std::string& metric, Dimension d) {
  double p = 0, r = 0, f = 0;
  if (metric == "tabeval") {
    p = e.tabeval.precision, r = e.tabeval.recall, f = e.tabeval.f1;
  } else {
    for (const auto& b : e.baselines)
      if (b.key() == metric) p = b.precision, r = b.recall, f = b.f1;
  }
  switch (d) {
    case Dimension::correctness:
      return p;
    case Dimension::completeness:
      return r;
    case Dimension::overall:
      return f;
  }
  return f;
}

}  // namespace

CorrelationTable correlate_report(std::span<const MetricReport> reports, std::span<const RatingRecord> ratings) {
  std::map<std::string, const MetricReport*> by_model;
  for (const auto& r : reports) by_model[r.model_id] = &r;

  // (model, table) -> summed ratings; std::map keeps the order independent of input order.
  std::map<std::pair<std::string, std::string>, HumanScore> items;
  for (const auto& rec : ratings) {
    auto& h = items[{rec.model_id, rec.table_id}];
    h.sum[static_cast<int>(Dimension::correctness)] += rec.correctness;
    h.sum[static_cast<int>(Dimension::completeness)] += rec.completeness;
    h.sum[static_cast<int>(Dimension::overall)] += rec.overall;
    ++h.raters;
  }

  std::set<std::string> metrics{"tabeval"};
  std::vector<std::tuple<std::string, const TableEntry*, const HumanScore*>> rows;
  for (const auto& [key, human] : items) {
    auto it = by_model.find(key.first);
    if (it == by_model.end()) throw MissingTable("no report for model " + key.first);
    const auto* entry = it->second->find(key.second);
    if (!entry) throw MissingTable("model " + key.first + " has no score for table " + key.second);
    for (const auto& b : entry->baselines) metrics.insert(b.key());
    rows.emplace_back(key.first, entry, &human);
  }

  std::vector<std::string> scopes;
  for (const auto& [key, _] : items)
    if (scopes.empty() || scopes.back() != key.first) scopes.push_back(key.first);
  scopes.push_back(kPooledScope);

  CorrelationTable out;
  for (const auto& scope : scopes) {
    for (const auto& metric : metrics) {
      for (auto d : kDimensions) {
        std::vector<double> xs, ys;
        for (const auto& [model, entry, human] : rows) {
          if (scope != kPooledScope && model != scope) continue;
          xs.push_back(metric_value(*entry, metric, d));
          ys.push_back(human->mean(d));
        }
        CorrelationCell cell{scope, metric, d, xs.size(), std::nullopt, {}};
        try {
          cell.r = pearson(xs, ys);
        } catch (const DegenerateInput& e) {
          cell.note = e.what();
        }
        out.cells.push_back(std::move(cell));
      }
    }
  }
  return out;
}

std::map<Dimension, std::optional<double>> rater_agreement(std::span<const RatingRecord> ratings, AlphaLevel level) {
  std::map<std::string, Eigen::Index> raters;
  std::map<std::pair<std::string, std::string>, Eigen::Index> items;
  for (const auto& r : ratings) {
    raters.emplace(r.rater_id, 0);
    items.emplace(std::pair{r.model_id, r.table_id}, 0);
  }
  Eigen::Index i = 0;
  for (auto& [_, idx] : raters) idx = i++;
  i = 0;
  for (auto& [_, idx] : items) idx = i++;

  std::map<Dimension, std::optional<double>> out;
  for (auto d : kDimensions) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(raters.size()),
                                                  static_cast<Eigen::Index>(items.size()), std::nan(""));
    for (const auto& r : ratings) {
      const int v = d == Dimension::correctness ? r.correctness : d == Dimension::completeness ? r.completeness
                                                                                              : r.overall;
      m(raters.at(r.rater_id), items.at({r.model_id, r.table_id})) = v;
    }
    try {
      out[d] = krippendorff_alpha(m, level);
    } catch (const DegenerateInput&) {
      out[d] = std::nullopt;
    }
  }
  return out;
}

ComparisonTable model_comparison(const std::map<std::string, MetricReport>& reports) {
  ComparisonTable t;
  t.columns = {"E", "chrF", "BS", "TabEval-P", "TabEval-R", "TabEval-F1"};
  const std::pair<const char*, const char*> baseline_cols[] = {{"E", "exact/"}, {"chrF", "chrf/"}, {"BS", "embedding/"}};
  for (const auto& [model, report] : reports) {
    t.models.push_back(model);
    auto& row = t.values[model];
    for (const auto& [col, prefix] : baseline_cols) {
      row[col] = std::nullopt;
      for (const auto& [key, v] : report.macro.baselines) {
        if (key.rfind(prefix, 0) == 0) {
          row[col] = 100.0 * v.f1;
          break;
        }
      }
    }
    row["TabEval-P"] = 100.0 * report.macro.tabeval.precision;
    row["TabEval-R"] = 100.0 * report.macro.tabeval.recall;
    row["TabEval-F1"] = 100.0 * report.macro.tabeval.f1;
  }
  return t;
}

json to_json(const CorrelationTable& table) {
  json cells = json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"scope", c.scope},
                     {"metric", c.metric},
                     {"dimension", to_string(c.dimension)},
                     {"n", c.n},
                     {"r", c.r ? json(*c.r) : json(nullptr)},
                     {"note", c.note}});
  }
  return {{"correlations", cells}};
}

json to_json(const ComparisonTable& table) {
  json rows = json::array();
  for (const auto& model : table.models) {
    json values = json::object();
    for (const auto& col : table.columns) {
      const auto& v = table.values.at(model).at(col);
      values[col] = v ? json(*v) : json(nullptr);
    }
    rows.push_back({{"model_id", model}, {"values", values}});
  }
  return {{"columns", table.columns}, {"rows", rows}};
}

std::string format_table(const CorrelationTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "scope" << std::setw(20) << "metric" << std::setw(14) << "dimension"
      << std::right << std::setw(6) << "n" << std::setw(10) << "r" << "\n";
  for (const auto& c : table.cells) {
    out << std::left << std::setw(16) << c.scope << std::setw(20) << c.metric << std::setw(14)
        << to_string(c.dimension) << std::right << std::setw(6) << c.n << std::setw(10);
    if (c.r) out << std::fixed << std::setprecision(4) << *c.r;
    else out << "n/a";
    out << "\n";
  }
  return out.str();
}

std::string format_table(const ComparisonTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "model";
  for (const auto& col : table.columns) out << std::right << std::setw(12) << col;
  out << "\n";
  for (const auto& model : table.models) {
    out << std::left << std::setw(16) << model;
    for (const auto& col : table.columns) {
      const auto& v = table.values.at(model).at(col);
      out << std::right << std::setw(12);
      if (v) out << std::fixed << std::setprecision(2) << *v;
      else out << "-";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace tabeval
