#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msnp/domain.h"

namespace msnp::trust {

struct InteractionRecord {
  PeerId provider;
  std::string sname;
  SemanticType stype;
  std::int64_t timestamp = 0;  // logical time
};

struct ServiceRate {
  std::string sname;
  SemanticType stype;
  RatingLevel rate = RatingLevel::Apprentice;
};

struct ProviderRating {
  PeerId provider;
  std::vector<ServiceRate> rates;
};

// Per service type, the peers whose judgement the owner trusts.
struct RecommendedReference {
  SemanticType stype;
  std::set<PeerId> ids;  // non-empty when the entry exists
};

// A participant's rating ledger: provider ratings, recommended
// references and interaction records.
struct ReputationData {
  PeerId owner;
  std::vector<ProviderRating> spr;
  std::vector<RecommendedReference> rr;
  std::vector<InteractionRecord> ir;

  const RatingLevel* find_rate(const PeerId& provider,
                               const std::string& sname) const;
  bool rated_provider(const PeerId& provider) const;  // any service
  std::size_t total_rating_records() const;
  const std::set<PeerId>* rr_for(const SemanticType& stype) const;
};

// Checks the RD invariants: one RR entry per stype, RR entries
// non-empty, every rated provider also present in IR.
void validate(const ReputationData& rd);

struct PscEntry {
  PeerId cid;
  std::vector<InteractionRecord> interactions;
};

// Provider-published list of consumers who used its services.
struct PscList {
  PeerId provider;
  std::vector<PscEntry> entries;
};

// JSON files: RD objects carry top-level keys owner/spr/rr/ir, a PSC
// file is a list of {cid, interactions} entries.
ReputationData load_rd_json(const std::string& path);
void save_rd_json(const ReputationData& rd, const std::string& path);
PscList load_psc_json(const std::string& path);
void save_psc_json(const PscList& psc, const std::string& path);

enum class Scheme {
  AF,
  AFOAF,
  HEF,
  HEFHEF,
  MSF,
  PublicNaive,
  PublicExpOnly,
  PublicCreditOnly,
  PublicProposed,
};

const char* scheme_name(Scheme scheme);

struct TrustVerdict {
  double score = 0.0;
  std::vector<PeerId> recommenders;
  // Runtime RD/rating fetches only; replicated friend RDs are free.
  std::int64_t transactions = 0;
  Scheme scheme = Scheme::AF;
};

// Pearson correlation over the services rated by both parties. Throws
// "insufficient overlap" below two common services and "undefined
// correlation" when either rating vector is constant over them.
double rating_similarity(const ReputationData& a, const ReputationData& b);
std::optional<double> try_rating_similarity(const ReputationData& a,
                                            const ReputationData& b);

enum class PscPlausibility { Usable, Suspicious, NewParticipant };

// What the requester knows when judging a provider's PSC list.
struct PscContext {
  std::set<PeerId> friends;
  std::vector<ReputationData> known_rds;  // collected proximal/friend RDs
  SemanticType stype;
  // A stranger is "highly creditable" when its credibility reaches the
  // top quartile among the known peers (nearest-rank quantile).
  double credibility_quantile = 0.75;
};

// A missing PSC from a provider with known history is suspicious; a
// present PSC is usable only when it names a trusted friend or a highly
// creditable stranger.
PscPlausibility check_psc_plausibility(const PscList* psc,
                                       const PeerId& provider,
                                       const PscContext& ctx);

// Friend RDs are passed by value-list everywhere below; verdicts never
// mutate them. Fetching a recommender's friends' RDs goes through this
// callback so transaction accounting can count real fetches.
using FoafFetcher =
    std::function<std::vector<ReputationData>(const PeerId& friend_id)>;

// All Friends: mean rating over friends who rated (provider, sname);
// every friend RD is fetched, so transactions = friend count.
TrustVerdict trust_af(const PeerId& provider, const std::string& sname,
                      const std::vector<ReputationData>& friends_rd);

// All FOAF: mean over distinct friends-of-friends who rated the service;
// transactions = sum of the friends' friend counts.
TrustVerdict trust_afoaf(const PeerId& requester, const PeerId& provider,
                         const std::string& sname,
                         const std::vector<ReputationData>& friends_rd,
                         const FoafFetcher& fetch_foaf_rds);

// High-Experience Friend (Algorithm 1 steps 1-2). Replicated friend RDs
// identify friends with experience of the service; the requester's RR
// entry for the stype narrows the pick when the intersection is
// non-empty. Returns nullopt when no friend rated the service (fall
// through to the FOAF step). transactions = 1.
std::optional<TrustVerdict> trust_hef(
    const ReputationData* requester_rd, const PeerId& provider,
    const std::string& sname, const SemanticType& stype,
    const std::vector<ReputationData>& friends_rd);

// FOAF of the High-Experience Friend (Algorithm 1 step 3). Picks the
// friend with most stype experience, fetches its friends' RDs, then uses
// the most stype-experienced of those who rated the service. Returns
// nullopt when none did (fall through to the public scheme).
std::optional<TrustVerdict> trust_hefhef(
    const PeerId& requester, const PeerId& provider, const std::string& sname,
    const SemanticType& stype, const std::vector<ReputationData>& friends_rd,
    const FoafFetcher& fetch_foaf_rds);

// Most Similar Friend: the rating of the friend with the highest Pearson
// similarity to the requester among friends with a defined similarity
// who rated the service. transactions = 1.
TrustVerdict trust_msf(const ReputationData& requester_rd,
                       const PeerId& provider, const std::string& sname,
                       const std::vector<ReputationData>& friends_rd);

// Credibility: how many of the other peers' RDs list p in their RR for
// the stype. Throws if p's own RD is present in crrd.
std::int64_t credibility(const PeerId& p, const SemanticType& stype,
                         const std::vector<ReputationData>& crrd);

// Count of the peer's interaction records matching the stype.
std::int64_t stype_experience(const ReputationData& rd,
                              const SemanticType& stype);

// Average of normalised credibility and normalised stype experience over
// the candidate population; a zero population sum contributes 0.
double recommender_trust_score(const PeerId& phi,
                               const std::vector<ReputationData>& candidates,
                               const SemanticType& stype);

enum class PublicScheme { Proposed, Naive, ExpOnly, CreditOnly };

// Recommendation from proximal strangers. The provider's own RD must not
// be in the proximal set. All schemes collect every proximal RD, so
// transactions = |proximal_rds|.
TrustVerdict trust_public(const PeerId& requester, const PeerId& provider,
                          const std::string& sname, const SemanticType& stype,
                          const std::vector<ReputationData>& proximal_rds,
                          PublicScheme scheme);

// True iff the rater rated the provider but is absent from the
// provider's PSC list: one of the two parties is dishonest.
bool dishonesty_flag(const PscList& provider_psc,
                     const ReputationData& rater_rd, const PeerId& provider);

// Cost-performance index: accuracy per transaction.
double cpi(double accuracy, double transactions);

// Algorithm 1 end to end: HEF, then HEFHEF, then the public scheme.
// Exactly one stage produces the verdict.
TrustVerdict run_algorithm1(const ReputationData& requester_rd,
                            const PeerId& provider, const std::string& sname,
                            const SemanticType& stype,
                            const std::vector<ReputationData>& friends_rd,
                            const FoafFetcher& fetch_foaf_rds,
                            const std::vector<ReputationData>& proximal_rds,
                            PublicScheme public_scheme = PublicScheme::Proposed);

}  // namespace msnp::trust
