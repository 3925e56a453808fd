#include "support/predictor_oracle.h"

#include <algorithm>
#include <set>

namespace msnp::oracle {

namespace {

bool record_has(const QueryRecord& r, const ContextValue& c) {
  for (const auto& held : r.contexts)
    if (held.ctype == c.ctype && held.value == c.value) return true;
  return false;
}

std::vector<Query> distinct_queries(const std::vector<QueryRecord>& records) {
  std::vector<Query> out;
  for (const auto& r : records) {
    bool seen = false;
    for (const auto& q : out)
      if (q.qid == r.query.qid) seen = true;
    if (!seen) out.push_back(r.query);
  }
  std::sort(out.begin(), out.end(),
            [](const Query& a, const Query& b) { return a.qid < b.qid; });
  return out;
}

}  // namespace

double p_context_given_query(const ContextValue& c, const Query& q,
                             const std::vector<QueryRecord>& records) {
  int with = 0, total = 0;
  for (const auto& r : records) {
    if (r.query.qid != q.qid) continue;
    ++total;
    if (record_has(r, c)) ++with;
  }
  return static_cast<double>(with) / static_cast<double>(total);
}

double p_query(const Query& q, const std::vector<QueryRecord>& records) {
  int count = 0;
  for (const auto& r : records)
    if (r.query.qid == q.qid) ++count;
  return static_cast<double>(count) / static_cast<double>(records.size());
}

double p_context(const ContextValue& c,
                 const std::vector<QueryRecord>& records) {
  double total = 0.0;
  for (const auto& q : distinct_queries(records))
    total += p_context_given_query(c, q, records) * p_query(q, records);
  return total;
}

std::optional<std::vector<OracleScore>> predict_scores(
    const std::vector<ContextValue>& current,
    const predictor::PredictionModel& model) {
  // Manual preference on an exact context-set match.
  for (const auto& pref : model.manual_overrides) {
    std::set<std::pair<std::string, std::string>> lhs, rhs;
    for (const auto& c : pref.contexts) lhs.insert({c.ctype, c.value});
    for (const auto& c : current) rhs.insert({c.ctype, c.value});
    if (lhs == rhs) return std::vector<OracleScore>{{pref.query.qid, 1.0}};
  }
  if (model.records.empty()) return std::nullopt;

  const auto queries = distinct_queries(model.records);
  std::vector<OracleScore> scores;
  bool informative = false;
  for (const auto& q : queries) {
    // Contexts surviving the filter rules and the unseen-context drop.
    std::vector<ContextValue> kept;
    for (const auto& c : current) {
      bool ignored = false;
      for (const auto& rule : model.filter_rules)
        if (rule.qid == q.qid && rule.ignored_ctypes.count(c.ctype) > 0)
          ignored = true;
      if (ignored) continue;
      if (p_context(c, model.records) == 0.0) continue;
      kept.push_back(c);
    }
    if (kept.empty()) {
      scores.push_back({q.qid, 0.0});
      continue;
    }
    informative = true;

    std::vector<double> weights;
    double weight_sum = 0.0;
    for (const auto& c : kept) {
      double weight = 0.0;
      bool specific = false;
      for (const auto& rule : model.importance_rules) {
        if (rule.ctype != c.ctype) continue;
        if (rule.qid && *rule.qid == q.qid) {
          weight = rule.weight;
          specific = true;
          break;
        }
      }
      if (!specific) {
        for (const auto& rule : model.importance_rules) {
          if (rule.ctype == c.ctype && !rule.qid) {
            weight = rule.weight;
            break;
          }
        }
      }
      weights.push_back(weight);
      weight_sum += weight;
    }

    double score = 0.0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const double posterior = p_context_given_query(kept[i], q, model.records) *
                               p_query(q, model.records) /
                               p_context(kept[i], model.records);
      score += posterior * (1.0 + weights[i]) /
               (static_cast<double>(kept.size()) + weight_sum);
    }
    scores.push_back({q.qid, score});
  }
  if (!informative) return std::nullopt;
  return scores;
}

}  // namespace msnp::oracle
