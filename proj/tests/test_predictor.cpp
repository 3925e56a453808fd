#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "msnp/data.h"
#include "msnp/predictor.h"
#include "support/predictor_oracle.h"

using namespace msnp;
using predictor::PredictionModel;

namespace {

QueryRecord rec(const std::string& qid,
                std::initializer_list<std::pair<std::string, std::string>> ctx) {
  QueryRecord r;
  r.query = Query{qid, SemanticType{qid}, {}};
  for (const auto& [ctype, value] : ctx) r.contexts.push_back({ctype, value});
  return r;
}

const ContextValue L1{"CL", "L1"};
const ContextValue L2{"CL", "L2"};
const ContextValue T1{"CT", "T1"};

}  // namespace

TEST_CASE("candidate_queries deduplicates by qid") {
  const std::vector<QueryRecord> records{rec("Q1", {{"CL", "L1"}}),
                                         rec("Q1", {{"CL", "L2"}}),
                                         rec("Q2", {{"CL", "L1"}})};
  const auto queries = predictor::candidate_queries(records);
  REQUIRE(queries.size() == 2);
  CHECK(queries[0].qid == "Q1");
  CHECK(queries[1].qid == "Q2");
  CHECK(predictor::candidate_queries({}).empty());
}

TEST_CASE("p_context_given_query counts joint occurrences") {
  const std::vector<QueryRecord> records{
      rec("Q1", {{"CL", "L1"}}), rec("Q1", {{"CL", "L1"}}),
      rec("Q1", {{"CL", "L2"}}), rec("Q1", {{"CL", "L2"}})};
  const Query q1{"Q1", {"Q1"}, {}};
  CHECK(predictor::p_context_given_query(L1, q1, records) ==
        doctest::Approx(0.5));
  CHECK(predictor::p_context_given_query({"CL", "L9"}, q1, records) ==
        doctest::Approx(0.0));
  const std::vector<QueryRecord> certain{rec("Q1", {{"CL", "L1"}}),
                                         rec("Q1", {{"CL", "L1"}})};
  CHECK(predictor::p_context_given_query(L1, q1, certain) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(
      predictor::p_context_given_query(L1, Query{"Q9", {}, {}}, records),
      std::runtime_error);
}

TEST_CASE("p_query is the relative frequency") {
  const std::vector<QueryRecord> records{
      rec("Q1", {}), rec("Q1", {}), rec("Q1", {}), rec("Q2", {})};
  CHECK(predictor::p_query(Query{"Q1", {}, {}}, records) ==
        doctest::Approx(0.75));
  CHECK(predictor::p_query(Query{"Q2", {}, {}}, records) ==
        doctest::Approx(0.25));
  CHECK(predictor::p_query(Query{"Q9", {}, {}}, records) ==
        doctest::Approx(0.0));
  const std::vector<QueryRecord> only{rec("Q1", {})};
  CHECK(predictor::p_query(Query{"Q1", {}, {}}, only) == doctest::Approx(1.0));
  CHECK_THROWS_AS(predictor::p_query(Query{"Q1", {}, {}}, {}),
                  std::runtime_error);
}

TEST_CASE("p_context sums over distinct queries") {
  const std::vector<QueryRecord> records{
      rec("Q1", {{"CL", "L1"}}), rec("Q1", {{"CL", "L1"}}),
      rec("Q2", {{"CL", "L2"}}), rec("Q2", {{"CL", "L2"}})};
  // 1.0 * 0.5 + 0.0 * 0.5
  CHECK(predictor::p_context(L1, records) == doctest::Approx(0.5));
  CHECK(predictor::p_context({"CL", "L9"}, records) == doctest::Approx(0.0));
  const std::vector<QueryRecord> everywhere{rec("Q1", {{"CT", "T1"}}),
                                            rec("Q2", {{"CT", "T1"}})};
  CHECK(predictor::p_context(T1, everywhere) == doctest::Approx(1.0));
  CHECK_THROWS_AS(predictor::p_context(L1, {}), std::runtime_error);
}

TEST_CASE("predict on a single record is certain") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}})};
  const auto prediction = predictor::predict({L1}, model);
  REQUIRE(prediction.ranking.size() == 1);
  CHECK(prediction.ranking[0].query.qid == "Q1");
  CHECK(prediction.ranking[0].score == doctest::Approx(1.0));
}

TEST_CASE("predict hand-evaluated two-query instance") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}})};
  const auto prediction = predictor::predict({L1, T1}, model);
  REQUIRE(prediction.ranking.size() == 2);
  // Q1: (1*0.5/0.5 + 1*0.5/1.0) / 2 = 0.75; Q2: (0 + 0.5) / 2 = 0.25.
  CHECK(prediction.ranking[0].query.qid == "Q1");
  CHECK(prediction.ranking[0].score == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(prediction.ranking[1].query.qid == "Q2");
  CHECK(prediction.ranking[1].score == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("predict applies importance weights per Eq 6") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}})};
  model.importance_rules = {{"CL", "Q1", 1.0}};
  const auto prediction = predictor::predict({L1, T1}, model);
  REQUIRE(prediction.ranking.size() == 2);
  // Q1's CL term gets (1+1)/(2+1), the CT term 1/(2+1):
  // 1*(2/3) + 0.5*(1/3) = 0.833333...
  CHECK(prediction.ranking[0].query.qid == "Q1");
  CHECK(prediction.ranking[0].score ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(prediction.ranking[1].score == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("query-specific importance beats a global rule") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T1"}})};
  model.importance_rules = {{"CL", std::nullopt, 3.0}, {"CL", "Q1", 1.0}};
  const auto prediction = predictor::predict({L1, T1}, model);
  // Q1 uses the query-specific weight 1 -> 5/6 as above.
  CHECK(prediction.ranking[0].query.qid == "Q1");
  CHECK(prediction.ranking[0].score ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  // Q2 falls back to the global weight 3 on its (zero) CL term:
  // 0*(4/5) + 0.5*(1/5) = 0.1.
  CHECK(prediction.ranking[1].score == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("manual override wins on an exact context match") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}})};
  model.manual_overrides = {{{L1, T1}, Query{"Q7", {"Q7"}, {}}}};
  const auto prediction = predictor::predict({T1, L1}, model);
  REQUIRE(prediction.ranking.size() == 1);
  CHECK(prediction.ranking[0].query.qid == "Q7");
  CHECK(prediction.ranking[0].score == doctest::Approx(1.0));
  // Subset does not trigger the override.
  const auto partial = predictor::predict({L1}, model);
  CHECK(partial.ranking[0].query.qid == "Q1");
}

TEST_CASE("predict error paths") {
  PredictionModel empty;
  CHECK_THROWS_WITH_AS(predictor::predict({L1}, empty),
                       doctest::Contains("cold start"), std::runtime_error);

  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}})};
  CHECK_THROWS_WITH_AS(predictor::predict({{"CL", "L9"}}, model),
                       doctest::Contains("no informative context"),
                       std::runtime_error);
  // A context filtered for every query counts as uninformative too.
  model.filter_rules = {{"Q1", {"CL"}}};
  CHECK_THROWS_AS(predictor::predict({L1}, model), std::runtime_error);
}

TEST_CASE("filter rule makes the query score context-independent") {
  PredictionModel model;
  model.records = {rec("Q1", {{"CL", "L1"}, {"CT", "T1"}}),
                   rec("Q1", {{"CL", "L2"}, {"CT", "T1"}}),
                   rec("Q2", {{"CL", "L2"}, {"CT", "T2"}})};
  model.filter_rules = {{"Q1", {"CL"}}};
  const auto score_q1 = [&](const ContextValue& cl) {
    const auto prediction = predictor::predict({cl, T1}, model);
    for (const auto& entry : prediction.ranking)
      if (entry.query.qid == "Q1") return entry.score;
    return -1.0;
  };
  CHECK(score_q1(L1) == doctest::Approx(score_q1(L2)).epsilon(1e-12));
}

TEST_CASE("scores sum to one without rules") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> n_records(1, 30), n_queries(1, 6),
        n_dims(1, 3), n_values(1, 3);
    const int dims = n_dims(rng), values = n_values(rng),
              queries = n_queries(rng);
    std::vector<QueryRecord> records;
    std::uniform_int_distribution<int> qpick(1, queries), vpick(1, values);
    const int count = n_records(rng);
    for (int i = 0; i < count; ++i) {
      QueryRecord r = rec("Q" + std::to_string(qpick(rng)), {});
      for (int d = 0; d < dims; ++d)
        r.contexts.push_back({"C" + std::to_string(d),
                              "v" + std::to_string(vpick(rng))});
      records.push_back(r);
    }
    PredictionModel model;
    model.records = records;
    // Current context drawn from observed values so nothing gets dropped.
    std::uniform_int_distribution<std::size_t> rpick(0, records.size() - 1);
    const auto& base = records[rpick(rng)];
    const auto prediction = predictor::predict(base.contexts, model);
    double sum = 0.0;
    for (const auto& entry : prediction.ranking) {
      CHECK(entry.score >= 0.0);
      CHECK(entry.score <= 1.0 + 1e-9);
      sum += entry.score;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("uniform global weights leave the ranking unchanged") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> qpick(1, 4), vpick(1, 3);
  std::vector<QueryRecord> records;
  for (int i = 0; i < 40; ++i) {
    QueryRecord r = rec("Q" + std::to_string(qpick(rng)), {});
    r.contexts.push_back({"CL", "v" + std::to_string(vpick(rng))});
    r.contexts.push_back({"CT", "v" + std::to_string(vpick(rng))});
    records.push_back(r);
  }
  PredictionModel plain;
  plain.records = records;
  PredictionModel weighted = plain;
  weighted.importance_rules = {{"CL", std::nullopt, 2.5},
                               {"CT", std::nullopt, 2.5}};
  for (int i = 0; i < 20; ++i) {
    const auto& base = records[static_cast<std::size_t>(i)];
    const auto a = predictor::predict(base.contexts, plain);
    const auto b = predictor::predict(base.contexts, weighted);
    REQUIRE(a.ranking.size() == b.ranking.size());
    CHECK(a.ranking.front().query.qid == b.ranking.front().query.qid);
    for (std::size_t k = 0; k < a.ranking.size(); ++k)
      CHECK(a.ranking[k].score ==
            doctest::Approx(b.ranking[k].score).epsilon(1e-12));
  }
}

TEST_CASE("predict agrees with the counting oracle on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_records(1, 8), qpick(1, 3), vpick(1, 2),
      has_dim(0, 2), weightful(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<QueryRecord> records;
    const int count = n_records(rng);
    for (int i = 0; i < count; ++i) {
      QueryRecord r = rec("Q" + std::to_string(qpick(rng)), {});
      for (int d = 0; d < 2; ++d)
        if (has_dim(rng) > 0)
          r.contexts.push_back({"C" + std::to_string(d),
                                "v" + std::to_string(vpick(rng))});
      records.push_back(r);
    }
    PredictionModel model;
    model.records = records;
    if (weightful(rng)) {
      model.importance_rules = {{"C0", std::nullopt, 1.5}, {"C1", "Q1", 2.0}};
      model.filter_rules = {{"Q2", {"C1"}}};
    }
    std::vector<ContextValue> current{{"C0", "v" + std::to_string(vpick(rng))},
                                      {"C1", "v" + std::to_string(vpick(rng))}};

    const auto expected = oracle::predict_scores(current, model);
    if (!expected) {
      CHECK_THROWS_AS(predictor::predict(current, model), std::runtime_error);
      continue;
    }
    const auto got = predictor::predict(current, model);
    REQUIRE(got.ranking.size() == expected->size());
    for (const auto& entry : got.ranking) {
      bool found = false;
      for (const auto& exp : *expected) {
        if (exp.qid != entry.query.qid) continue;
        found = true;
        CHECK(std::fabs(entry.score - exp.score) <= 1e-12);
      }
      CHECK(found);
    }
  }
}

TEST_CASE("evaluate_accuracy on deterministic contexts") {
  std::vector<QueryRecord> records;
  for (int i = 0; i < 40; ++i) {
    const int q = i % 4 + 1;
    records.push_back(rec("Q" + std::to_string(q),
                          {{"CL", "L" + std::to_string(q)}}));
  }
  CHECK(predictor::evaluate_accuracy(records, 0.5, 1) == doctest::Approx(1.0));
}

TEST_CASE("evaluate_accuracy near chance for context-free queries") {
  // Contexts carry no signal: five queries share one context value.
  double total = 0.0;
  int trials = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> qpick(1, 5);
    std::vector<QueryRecord> records;
    for (int i = 0; i < 100; ++i)
      records.push_back(
          rec("Q" + std::to_string(qpick(rng)), {{"CL", "L1"}}));
    total += predictor::evaluate_accuracy(records, 0.6, seed);
    ++trials;
  }
  const double mean = total / trials;
  CHECK(mean > 0.1);
  CHECK(mean < 0.3);
}

TEST_CASE("evaluate_accuracy rejects degenerate splits") {
  std::vector<QueryRecord> records{rec("Q1", {{"CL", "L1"}}),
                                   rec("Q1", {{"CL", "L1"}})};
  CHECK_THROWS_AS(predictor::evaluate_accuracy(records, 0.2, 1),
                  std::runtime_error);
  const std::vector<QueryRecord> one{rec("Q1", {{"CL", "L1"}})};
  CHECK_THROWS_AS(predictor::evaluate_accuracy(one, 0.9, 1),
                  std::runtime_error);
  CHECK_THROWS_AS(predictor::evaluate_accuracy(records, 1.5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(predictor::evaluate_accuracy(records, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("table1 generator lands in a sane accuracy band") {
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto records = data::generate_records(data::table1_spec(), 100, seed);
    total += predictor::evaluate_accuracy(records, 0.6, seed);
  }
  const double mean = total / 5.0;
  CHECK(mean > 0.6);
  CHECK(mean <= 1.0);
}
