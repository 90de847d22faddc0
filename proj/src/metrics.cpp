#include "tabeval/metrics.hpp"

#include "tabeval/error.hpp"

namespace tabeval {

std::string_view to_string(DirectionPolicy p) {
  switch (p) {
    case DirectionPolicy::per_metric:
      return "per_metric";
    case DirectionPolicy::gold_premise:
      return "gold_premise";
    case DirectionPolicy::pred_premise:
      return "pred_premise";
    case DirectionPolicy::max_both:
      return "max_both";
  }
  return "?";
}

DirectionPolicy direction_policy_from_string(std::string_view s) {
  if (s == "per_metric") return DirectionPolicy::per_metric;
  if (s == "gold_premise") return DirectionPolicy::gold_premise;
  if (s == "pred_premise") return DirectionPolicy::pred_premise;
  if (s == "max_both") return DirectionPolicy::max_both;
  throw ConfigError("unknown direction policy: " + std::string(s));
}

TableScore score_statements(const StatementSet& predicted, const StatementSet& gold, const PairScorer& scorer,
                            DirectionPolicy direction) {
  const auto n = predicted.size(), m = gold.size();
  if (n == 0 && m == 0) return {1.0, 1.0, 1.0, 0, 0};
  if (n == 0 || m == 0) return {0.0, 0.0, 0.0, n, m};

  double precision = 0.0, recall = 0.0;
  switch (direction) {
    case DirectionPolicy::per_metric:
      precision = aggregate_precision(build_matrix(predicted, gold, Direction::gold_entails_pred, scorer));
      recall = aggregate_recall(build_matrix(predicted, gold, Direction::pred_entails_gold, scorer));
      break;
    case DirectionPolicy::gold_premise: {
      auto mat = build_matrix(predicted, gold, Direction::gold_entails_pred, scorer);
      precision = aggregate_precision(mat);
      recall = aggregate_recall(mat);
      break;
    }
    case DirectionPolicy::pred_premise: {
      auto mat = build_matrix(predicted, gold, Direction::pred_entails_gold, scorer);
      precision = aggregate_precision(mat);
      recall = aggregate_recall(mat);
      break;
    }
    case DirectionPolicy::max_both: {
      auto a = build_matrix(predicted, gold, Direction::gold_entails_pred, scorer);
      auto b = build_matrix(predicted, gold, Direction::pred_entails_gold, scorer);
      Eigen::MatrixXd both = a.values.cwiseMax(b.values);
      precision = aggregate_precision(both);
      recall = aggregate_recall(both);
      break;
    }
  }
  return TableScore::from(precision, recall, n, m);
}

namespace {

StatementSet checked_unroll(const Table& table, Unroller& unroller, const TabEvalOptions& opts,
                            std::string_view side, std::vector<std::string>* warnings) {
  if (table.num_rows() == 0) return {};
  auto set = unroller.unroll(table);
  auto report = validate_attribution(set, table);
  if (!report.clean() && warnings) {
    warnings->push_back(std::string(side) + ": " + std::to_string(report.flagged.size()) +
                        " statement(s) not supported by the table" + (opts.strict_attribution ? " (dropped)" : ""));
  }
  if (opts.strict_attribution) set = drop_unsupported(set, report);
  return set;
}

}  // namespace

TableScore tabeval_score(const Table& gold, const Table& pred, Unroller& unroller, const PairScorer& scorer,
                         const TabEvalOptions& opts, std::vector<std::string>* warnings) {
  auto gold_set = checked_unroll(gold, unroller, opts, "gold", warnings);
  auto pred_set = checked_unroll(pred, unroller, opts, "prediction", warnings);
  return score_statements(pred_set, gold_set, scorer, opts.direction);
}

}  // namespace tabeval
