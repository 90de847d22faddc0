#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tabeval/error.hpp"
#include "tabeval/metrics.hpp"

using namespace tabeval;
using doctest::Approx;

namespace {

Eigen::MatrixXd fixture_matrix() {
  Eigen::MatrixXd m(3, 2);
  m << 0.9, 0.2, 0.1, 0.8, 0.4, 0.3;
  return m;
}

StatementSet statements(const std::vector<std::string>& texts) {
  StatementSet s;
  for (const auto& t : texts) s.statements.push_back({t, {}});
  return s;
}

std::vector<std::string> random_sentences(std::mt19937& rng, std::size_t max_n) {
  static const std::vector<std::string> words{"red", "blue", "green", "fast", "slow", "cat", "dog"};
  std::uniform_int_distribution<std::size_t> n(1, max_n), len(1, 4), w(0, words.size() - 1);
  std::vector<std::string> out(n(rng));
  for (auto& s : out) {
    for (auto k = len(rng); k > 0; --k) s += words[w(rng)] + " ";
  }
  return out;
}

// Premise entails hypothesis when it contains it; deliberately one-directional.
class ContainsScorer final : public PairScorer {
 public:
  std::vector<double> score(std::span<const ScorePair> pairs) const override {
    std::vector<double> out;
    for (const auto& p : pairs) out.push_back(p.premise.find(p.hypothesis) != std::string::npos ? 1.0 : 0.0);
    return out;
  }
};

// Returns fixed statements regardless of the table.
class FixedUnroller final : public Unroller {
 public:
  StatementSet set;
  StatementSet unroll(const Table&) override { return set; }
};

}  // namespace

TEST_SUITE("aggregation") {
  TEST_CASE("worked fixture") {
    const auto m = fixture_matrix();
    const double p = aggregate_precision(m), r = aggregate_recall(m);
    CHECK(p == Approx(0.7).epsilon(1e-12));
    CHECK(r == Approx(0.85).epsilon(1e-12));
    CHECK(std::abs(f1(p, r) - 0.767742) < 1e-6);
    CHECK(std::abs(f1(p, r) - 1.19 / 1.55) < 1e-12);
  }

  TEST_CASE("degenerate matrices") {
    CHECK(aggregate_precision(Eigen::MatrixXd::Ones(4, 7)) == 1.0);
    CHECK(aggregate_recall(Eigen::MatrixXd::Zero(3, 5)) == 0.0);
    Eigen::MatrixXd one(1, 1);
    one << 0.42;
    CHECK(aggregate_precision(one) == 0.42);
    CHECK(aggregate_recall(one) == 0.42);
    Eigen::MatrixXd column(3, 1);
    column << 0.1, 0.6, 0.3;
    CHECK(aggregate_recall(column) == 0.6);
    CHECK_THROWS_AS(aggregate_precision(Eigen::MatrixXd(0, 3)), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_recall(Eigen::MatrixXd(2, 0)), std::invalid_argument);
  }

  TEST_CASE("f1") {
    CHECK(f1(1.0, 1.0) == 1.0);
    CHECK(f1(0.0, 0.9) == 0.0);
    CHECK(f1(0.0, 0.0) == 0.0);
  }

  TEST_CASE("property: loop oracle on random matrices") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> dim(1, 20);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
      const int n = dim(rng), m = dim(rng);
      std::vector<std::vector<double>> v(n, std::vector<double>(m));
      Eigen::MatrixXd e(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) e(i, j) = v[i][j] = val(rng);
      const double p = aggregate_precision(e), r = aggregate_recall(e);
      REQUIRE(std::abs(p - oracle::precision(v)) <= 1e-12);
      REQUIRE(std::abs(r - oracle::recall(v)) <= 1e-12);
      const double f = f1(p, r);
      REQUIRE((0.0 <= f && f <= 1.0));
      REQUIRE(std::min(p, r) <= f + 1e-15);
      REQUIRE(f <= (p + r) / 2 + 1e-15);
    }
  }

  TEST_CASE("works on EntailmentMatrix and blocks") {
    EntailmentMatrix em{fixture_matrix(), Direction::gold_entails_pred};
    CHECK(aggregate_precision(em) == Approx(0.7));
    CHECK(aggregate_recall(fixture_matrix().topRows(2)) == Approx(0.85));
  }
}

TEST_SUITE("score_statements") {
  TEST_CASE("edge rules") {
    auto exact = make_scorer({});
    const auto some = statements({"a"});
    const auto both = score_statements({}, {}, *exact);
    CHECK(both.f1 == 1.0);
    CHECK(both.precision == 1.0);
    const auto no_pred = score_statements({}, some, *exact);
    CHECK(no_pred.f1 == 0.0);
    CHECK(no_pred.n_pred == 0);
    CHECK(no_pred.n_gold == 1);
    const auto no_gold = score_statements(some, {}, *exact);
    CHECK(no_gold.precision == 0.0);
    CHECK(no_gold.recall == 0.0);
  }

  TEST_CASE("direction policies") {
    // Gold "a b" contains pred "a": gold => pred holds, pred => gold does not.
    const auto pred = statements({"a"}), gold = statements({"a b"});
    ContainsScorer s;
    const auto per = score_statements(pred, gold, s, DirectionPolicy::per_metric);
    CHECK(per.precision == 1.0);
    CHECK(per.recall == 0.0);
    const auto gp = score_statements(pred, gold, s, DirectionPolicy::gold_premise);
    CHECK(gp.precision == 1.0);
    CHECK(gp.recall == 1.0);
    const auto pp = score_statements(pred, gold, s, DirectionPolicy::pred_premise);
    CHECK(pp.precision == 0.0);
    CHECK(pp.recall == 0.0);
    const auto mb = score_statements(gold, pred, s, DirectionPolicy::max_both);
    CHECK(mb.f1 == 1.0);
    CHECK(direction_policy_from_string(to_string(DirectionPolicy::max_both)) == DirectionPolicy::max_both);
    CHECK_THROWS_AS(direction_policy_from_string("both"), ConfigError);
  }

  TEST_CASE("property: duplicated predictions and swap duality") {
    std::mt19937 rng(77);
    ScorerConfig lex;
    lex.backend = ScorerBackend::lexical;
    auto lexical = make_scorer(lex);
    auto exact = make_scorer({});
    for (int k = 0; k < 300; ++k) {
      const auto p = statements(random_sentences(rng, 6));
      const auto g = statements(random_sentences(rng, 6));
      for (const PairScorer* s : {lexical.get(), exact.get()}) {
        const auto base = score_statements(p, g, *s);
        // A duplicated prediction leaves every column maximum alone and adds
        // its own row maximum once more to the precision mean.
        const auto pick = rng() % p.size();
        auto dup = p;
        dup.statements.push_back(p.statements[pick]);
        const auto with_dup = score_statements(dup, g, *s);
        REQUIRE(with_dup.recall == Approx(base.recall).epsilon(1e-12));
        const auto m = build_matrix(p, g, Direction::gold_entails_pred, *s).values;
        const double n = static_cast<double>(p.size());
        REQUIRE(with_dup.precision == Approx((n * base.precision + m.row(pick).maxCoeff()) / (n + 1)).epsilon(1e-12));
        if (m.rowwise().maxCoeff().isConstant(m.row(pick).maxCoeff()))
          REQUIRE(with_dup.precision == Approx(base.precision).epsilon(1e-12));
        const auto swapped = score_statements(g, p, *s);
        REQUIRE(swapped.precision == Approx(base.recall).epsilon(1e-12));
        REQUIRE(swapped.recall == Approx(base.precision).epsilon(1e-12));
        REQUIRE((0.0 <= base.f1 && base.f1 <= 1.0));
      }
    }
  }
}

TEST_SUITE("tabeval_score") {
  TEST_CASE("identical tables score one") {
    DeterministicUnroller u;
    auto exact = make_scorer({});
    const auto s = tabeval_score(fixtures::rice(), fixtures::rice(), u, *exact);
    CHECK(s.f1 == 1.0);
    CHECK(s.n_pred == 10);
    CHECK(s.n_gold == 10);
  }

  TEST_CASE("row order does not matter") {
    DeterministicUnroller u;
    auto exact = make_scorer({});
    auto permuted = fixtures::rice();
    std::reverse(permuted.rows.begin(), permuted.rows.end());
    const auto s = tabeval_score(fixtures::rice(), permuted, u, *exact);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
  }

  TEST_CASE("one corrupted Role cell costs one statement per side") {
    DeterministicUnroller u;
    auto exact = make_scorer({});
    const auto gold = fixtures::rice();
    auto pred = gold;
    pred.rows[2][2].text = "Sophie Giles";
    const auto s = tabeval_score(gold, pred, u, *exact);

    // Brute force over the 10 x 10 exact matrix.
    const auto g = unroll_deterministic(gold).texts(), p = unroll_deterministic(pred).texts();
    REQUIRE(g.size() == 10);
    REQUIRE(p.size() == 10);
    double row_sum = 0.0, col_sum = 0.0;
    for (const auto& pi : p) {
      double best = 0.0;
      for (const auto& gj : g) best = std::max(best, pi == gj ? 1.0 : 0.0);
      row_sum += best;
    }
    for (const auto& gj : g) {
      double best = 0.0;
      for (const auto& pi : p) best = std::max(best, pi == gj ? 1.0 : 0.0);
      col_sum += best;
    }
    CHECK(row_sum / 10 == 0.9);
    CHECK(col_sum / 10 == 0.9);
    CHECK(s.precision == Approx(0.9).epsilon(1e-12));
    CHECK(s.recall == Approx(0.9).epsilon(1e-12));
    CHECK(s.f1 == Approx(0.9).epsilon(1e-12));
  }

  TEST_CASE("a prediction missing a row loses recall only") {
    DeterministicUnroller u;
    auto exact = make_scorer({});
    auto pred = fixtures::rice();
    pred.rows.pop_back();
    const auto s = tabeval_score(fixtures::rice(), pred, u, *exact);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == Approx(0.8));
  }

  TEST_CASE("empty tables") {
    DeterministicUnroller u;
    auto exact = make_scorer({});
    const auto empty = parse_markdown("|Year|Title|\n|-|-|\n", "x");
    const auto no_pred = tabeval_score(fixtures::rice(), empty, u, *exact);
    CHECK(no_pred.f1 == 0.0);
    CHECK(no_pred.n_pred == 0);
    CHECK(tabeval_score(empty, empty, u, *exact).f1 == 1.0);
    CHECK(tabeval_score(empty, fixtures::rice(), u, *exact).f1 == 0.0);
  }

  TEST_CASE("unsupported statements are reported and dropped in strict mode") {
    FixedUnroller u;
    u.set = statements({"Koch 1966", "Koch won the Olympics"});
    auto exact = make_scorer({});
    std::vector<std::string> warnings;
    const auto lenient = tabeval_score(fixtures::koch(), fixtures::koch(), u, *exact, {}, &warnings);
    CHECK(lenient.n_pred == 2);
    CHECK(warnings.size() == 2);
    warnings.clear();
    TabEvalOptions strict;
    strict.strict_attribution = true;
    const auto s = tabeval_score(fixtures::koch(), fixtures::koch(), u, *exact, strict, &warnings);
    CHECK(s.n_pred == 1);
    CHECK(s.n_gold == 1);
    CHECK(s.f1 == 1.0);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("dropped") != std::string::npos);
  }

  TEST_CASE("TableScore keeps the F1 law") {
    const auto s = TableScore::from(0.7, 0.85, 3, 2);
    CHECK(s.f1 == f1(0.7, 0.85));
    CHECK(TableScore::from(0, 0, 0, 0).f1 == 0.0);
  }
}
