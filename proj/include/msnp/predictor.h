#pragma once

#include <cstdint>
#include <vector>

#include "msnp/domain.h"

namespace msnp::predictor {

// A user-pinned preference: when the current context set equals
// `contexts` exactly, `query` wins outright.
struct ManualPreference {
  std::vector<ContextValue> contexts;
  Query query;
};

struct PredictionModel {
  std::vector<QueryRecord> records;
  std::vector<ImportanceRule> importance_rules;
  std::vector<FilterRule> filter_rules;
  std::vector<ManualPreference> manual_overrides;
};

struct ScoredQuery {
  Query query;
  double score = 0.0;  // in [0, 1]
};

// Ranking sorted by descending score; ties broken by ascending qid.
struct Prediction {
  std::vector<ScoredQuery> ranking;
};

// Distinct queries appearing in the records, ascending by qid.
std::vector<Query> candidate_queries(const std::vector<QueryRecord>& records);

// P(c | q): share of q's records whose context set contains c.
// Throws if q never appears in the records.
double p_context_given_query(const ContextValue& c, const Query& q,
                             const std::vector<QueryRecord>& records);

// P(q): relative frequency of q. Throws on empty records.
double p_query(const Query& q, const std::vector<QueryRecord>& records);

// P(c): total probability of c over the distinct candidate queries.
// Throws on empty records.
double p_context(const ContextValue& c,
                 const std::vector<QueryRecord>& records);

// Scores every candidate query against the current context set using the
// importance-weighted Bayes combination. Per query: filter rules drop
// ignored context types, never-observed contexts are dropped (no
// evidence), remaining posteriors are combined with weights
// (1+v)/(|C|+sum v). Manual preferences take priority when the context
// set matches exactly.
//
// Throws "cold start" when the model has no records and no matching
// manual preference, and "no informative context" when every current
// context is filtered or unseen for every query.
Prediction predict(const std::vector<ContextValue>& current,
                   const PredictionModel& model);

// Chronological split: the first floor(fraction*N) records train, the
// rest are predicted from their context sets. Returns the share of test
// records whose top-ranked query matches the actual query. The seed does
// not influence the split; it identifies the upstream generator run.
double evaluate_accuracy(const std::vector<QueryRecord>& records,
                         double training_fraction, std::uint64_t seed);

}  // namespace msnp::predictor
