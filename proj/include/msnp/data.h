#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msnp/domain.h"
#include "msnp/trust.h"

namespace msnp::data {

struct TrustEdge {
  PeerId rater;
  PeerId ratee;
  RatingLevel level = RatingLevel::Apprentice;
  bool operator==(const TrustEdge&) const = default;
};

// Directed rated edges, at most one per (rater, ratee) pair.
struct TrustGraph {
  std::vector<TrustEdge> edges;

  std::vector<PeerId> peers() const;  // every rater or ratee, ascending
  std::map<PeerId, std::size_t> out_degrees() const;
};

struct GraphLoadStats {
  std::size_t malformed_lines = 0;
  std::size_t duplicate_edges = 0;
};

// Whitespace-separated `rater ratee level` lines with '#' comments;
// levels are words (apprentice/journeyer/master) or the numeric values
// 0.6/0.8/1.0. Malformed lines (including self-ratings) are counted and
// reported; on duplicate pairs the last edge wins with a warning.
// Throws on an unreadable file or when no valid edge remains.
TrustGraph load_trust_graph(const std::string& path,
                            GraphLoadStats* stats = nullptr);
void save_trust_graph(const TrustGraph& g, const std::string& path);

// Single pass: keeps only edges whose rater has out-degree >= min.
TrustGraph filter_min_ratings(const TrustGraph& g, std::size_t min_ratings = 10);

struct FriendSets {
  std::set<PeerId> friends;      // mutual Master ratings
  std::set<PeerId> non_friends;  // rated peers that are not friends
};

std::map<PeerId, FriendSets> classify_friends(const TrustGraph& g);

struct ServiceAssignment {
  std::string sname;
  SemanticType stype;
};

using StypeAssignment = std::map<PeerId, ServiceAssignment>;

// Every peer offers one service of the given type, named after itself.
StypeAssignment uniform_assignment(const TrustGraph& g,
                                   const SemanticType& stype);

// Bridges graph edges to reputation ledgers: one SPR and one IR entry
// per out-edge; RR lists, per stype, the rater's friends holding at
// least one Master-level rating of a provider of that stype. Every peer
// receives an RD (empty for pure ratees). Throws on an unassigned ratee.
std::map<PeerId, trust::ReputationData> trust_graph_to_rds(
    const TrustGraph& g, const StypeAssignment& assignment);

struct DimensionSpec {
  std::string ctype;
  std::vector<std::string> values;  // single value = fixed cell
};

struct RowSpec {
  std::string qid;
  std::vector<DimensionSpec> dims;
};

struct GeneratorSpec {
  std::vector<RowSpec> rows;  // every row names all dimensions
};

void validate_spec(const GeneratorSpec& spec);

// The five-row CL/CT/CA/CW/CP parameter table used by the prediction
// experiments.
GeneratorSpec table1_spec();

// Draws a row type uniformly per record, then each dimension's value
// (fixed cell or uniform over the range). Deterministic per seed.
std::vector<QueryRecord> generate_records(const GeneratorSpec& spec,
                                          std::size_t n, std::uint64_t seed);

// CSV with columns location, action, object: the object becomes the
// query, location and action the context set.
std::vector<QueryRecord> load_sequence_dataset(const std::string& path);

// Records CSV: header line, then `qid,ctype=value;ctype=value;...`.
std::vector<QueryRecord> load_records_csv(const std::string& path);
void save_records_csv(const std::vector<QueryRecord>& records,
                      const std::string& path);

struct RuleSet {
  std::vector<ImportanceRule> importance;
  std::vector<FilterRule> filters;
};

// Key-value rule config: `importance = ctype[,qid],weight` and
// `filter = qid:ctype1;ctype2` lines, '#' comments.
RuleSet load_rules(const std::string& path);

// Synthetic trust graph with planted rating behaviour: experts rate a
// provider's true quality, noisy raters rate uniformly at random, and
// requesters' own ratings follow the true quality. Hub peers befriend
// experts so that credibility carries signal. Every user ends up with
// at least 10 ratings.
struct PlantedGraphConfig {
  std::size_t providers = 60;
  std::size_t experts = 40;
  std::size_t hubs = 20;
  std::size_t noisy = 80;
  std::size_t friend_raters = 100;
  std::size_t requesters = 340;
  std::size_t expert_rates = 30;     // providers rated per expert
  std::size_t hub_rates = 8;         // providers rated per hub
  std::size_t noisy_rates = 12;      // providers rated per noisy rater
  std::size_t friend_rates = 10;     // providers rated per friend rater
  std::size_t provider_rates = 10;   // providers rated per provider (noise)
  std::size_t targets_per_requester = 8;
  std::size_t experts_per_requester = 2;
  std::size_t hubs_per_requester = 2;
  std::size_t noisy_per_requester = 10;
  std::size_t friends_per_requester = 6;
  std::uint64_t seed = 1;
};

TrustGraph generate_planted_graph(const PlantedGraphConfig& config);

}  // namespace msnp::data
