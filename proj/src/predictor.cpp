#include "msnp/predictor.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace msnp::predictor {

namespace {

std::size_t count_query(const Query& q, const std::vector<QueryRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.query == q) ++n;
  return n;
}

std::size_t count_query_with_context(const Query& q, const ContextValue& c,
                                     const std::vector<QueryRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.query == q && has_context(r, c)) ++n;
  return n;
}

bool same_context_set(const std::vector<ContextValue>& a,
                      const std::vector<ContextValue>& b) {
  if (a.size() != b.size()) return false;
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

// Query-specific rule beats a global rule; the first matching rule of
// each kind applies.
double importance_weight(const ContextValue& c, const std::string& qid,
                         const std::vector<ImportanceRule>& rules) {
  const ImportanceRule* global = nullptr;
  for (const auto& rule : rules) {
    if (rule.ctype != c.ctype) continue;
    if (rule.qid) {
      if (*rule.qid == qid) return rule.weight;
    } else if (!global) {
      global = &rule;
    }
  }
  return global ? global->weight : 0.0;
}

}  // namespace

std::vector<Query> candidate_queries(const std::vector<QueryRecord>& records) {
  std::map<std::string, Query> by_qid;
  for (const auto& r : records) by_qid.emplace(r.query.qid, r.query);
  std::vector<Query> out;
  out.reserve(by_qid.size());
  for (auto& [qid, q] : by_qid) out.push_back(q);
  return out;
}

double p_context_given_query(const ContextValue& c, const Query& q,
                             const std::vector<QueryRecord>& records) {
  const std::size_t nq = count_query(q, records);
  if (nq == 0) throw std::runtime_error("unknown query: " + q.qid);
  return static_cast<double>(count_query_with_context(q, c, records)) /
         static_cast<double>(nq);
}

double p_query(const Query& q, const std::vector<QueryRecord>& records) {
  if (records.empty()) throw std::runtime_error("empty record set");
  return static_cast<double>(count_query(q, records)) /
         static_cast<double>(records.size());
}

double p_context(const ContextValue& c,
                 const std::vector<QueryRecord>& records) {
  if (records.empty()) throw std::runtime_error("empty record set");
  double total = 0.0;
  for (const auto& q : candidate_queries(records))
    total += p_context_given_query(c, q, records) * p_query(q, records);
  return total;
}

Prediction predict(const std::vector<ContextValue>& current,
                   const PredictionModel& model) {
  for (const auto& pref : model.manual_overrides)
    if (same_context_set(pref.contexts, current))
      return Prediction{{ScoredQuery{pref.query, 1.0}}};

  if (model.records.empty())
    throw std::runtime_error("cold start: no records and no manual preference");

  const auto queries = candidate_queries(model.records);

  // P(c) is query-independent; compute once per current context.
  std::map<ContextValue, double> ctx_prob;
  for (const auto& c : current)
    ctx_prob.emplace(c, p_context(c, model.records));

  Prediction out;
  bool any_informative = false;
  for (const auto& q : queries) {
    std::set<std::string> ignored;
    for (const auto& rule : model.filter_rules)
      if (rule.qid == q.qid)
        ignored.insert(rule.ignored_ctypes.begin(), rule.ignored_ctypes.end());

    std::vector<const ContextValue*> considered;
    for (const auto& c : current) {
      if (ignored.contains(c.ctype)) continue;
      if (ctx_prob.at(c) <= 0.0) continue;  // unseen context carries no evidence
      considered.push_back(&c);
    }
    if (considered.empty()) {
      out.ranking.push_back({q, 0.0});
      continue;
    }
    any_informative = true;

    const double pq = p_query(q, model.records);
    std::vector<double> weights(considered.size(), 0.0);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < considered.size(); ++i) {
      weights[i] = importance_weight(*considered[i], q.qid,
                                     model.importance_rules);
      weight_sum += weights[i];
    }
    const double denom = static_cast<double>(considered.size()) + weight_sum;

    double score = 0.0;
    for (std::size_t i = 0; i < considered.size(); ++i) {
      const ContextValue& c = *considered[i];
      const double posterior =
          p_context_given_query(c, q, model.records) * pq / ctx_prob.at(c);
      score += posterior * (1.0 + weights[i]) / denom;
    }
    out.ranking.push_back({q, score});
  }

  if (!any_informative)
    throw std::runtime_error("no informative context for any candidate query");

  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [](const ScoredQuery& a, const ScoredQuery& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.query.qid < b.query.qid;
                   });
  return out;
}

double evaluate_accuracy(const std::vector<QueryRecord>& records,
                         double training_fraction, std::uint64_t /*seed*/) {
  if (!(training_fraction > 0.0 && training_fraction < 1.0))
    throw std::invalid_argument("training fraction must lie in (0,1)");
  // Small epsilon keeps exact fractions like 0.6*100 from flooring to 59.
  const auto n_train = static_cast<std::size_t>(
      training_fraction * static_cast<double>(records.size()) + 1e-9);
  if (n_train == 0 || n_train >= records.size())
    throw std::runtime_error("degenerate training split");

  PredictionModel model;
  model.records.assign(records.begin(),
                       records.begin() + static_cast<std::ptrdiff_t>(n_train));

  std::size_t hits = 0, tests = 0;
  for (std::size_t i = n_train; i < records.size(); ++i) {
    ++tests;
    try {
      const auto prediction = predict(records[i].contexts, model);
      if (!prediction.ranking.empty() &&
          prediction.ranking.front().query.qid == records[i].query.qid)
        ++hits;
    } catch (const std::runtime_error&) {
      // Unpredictable record counts as a miss.
    }
  }
  return static_cast<double>(hits) / static_cast<double>(tests);
}

}  // namespace msnp::predictor
