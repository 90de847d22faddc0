#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "tabeval/entail.hpp"
#include "tabeval/table.hpp"
#include "tabeval/unroll.hpp"

namespace tabeval {

// Mean over rows of the row maximum: each predicted statement's best support.
template <typename Derived>
double aggregate_precision(const Eigen::MatrixBase<Derived>& scores) {
  if (scores.rows() == 0 || scores.cols() == 0) throw std::invalid_argument("aggregate_precision: empty matrix");
  return scores.rowwise().maxCoeff().mean();
}

// Mean over columns of the column maximum: each gold statement's best support.
template <typename Derived>
double aggregate_recall(const Eigen::MatrixBase<Derived>& scores) {
  if (scores.rows() == 0 || scores.cols() == 0) throw std::invalid_argument("aggregate_recall: empty matrix");
  return scores.colwise().maxCoeff().mean();
}

inline double aggregate_precision(const EntailmentMatrix& m) { return aggregate_precision(m.values); }
inline double aggregate_recall(const EntailmentMatrix& m) { return aggregate_recall(m.values); }

// Harmonic mean; 0 when both inputs are 0.
inline double f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

struct TableScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;

  static TableScore from(double p, double r, std::size_t n_pred, std::size_t n_gold) {
    return {p, r, tabeval::f1(p, r), n_pred, n_gold};
  }
};

// Which entailment direction feeds precision and recall.
//  per_metric:   precision from gold => pred, recall from pred => gold
//  gold_premise: gold => pred for both
//  pred_premise: pred => gold for both
//  max_both:     elementwise max of the two directions for both
enum class DirectionPolicy { per_metric, gold_premise, pred_premise, max_both };

std::string_view to_string(DirectionPolicy p);
DirectionPolicy direction_policy_from_string(std::string_view s);

struct TabEvalOptions {
  DirectionPolicy direction = DirectionPolicy::per_metric;
  bool strict_attribution = false;
};

// Scores two statement sets. Empty prediction gives zeros; both empty gives
// ones; an empty gold set with a non-empty prediction gives zeros.
TableScore score_statements(const StatementSet& predicted, const StatementSet& gold, const PairScorer& scorer,
                            DirectionPolicy direction = DirectionPolicy::per_metric);

// Unrolls both tables, then score_statements. Attribution flags are appended
// to `warnings` when given; strict mode drops the flagged statements.
TableScore tabeval_score(const Table& gold, const Table& pred, Unroller& unroller, const PairScorer& scorer,
                         const TabEvalOptions& opts = {}, std::vector<std::string>* warnings = nullptr);

}  // namespace tabeval
