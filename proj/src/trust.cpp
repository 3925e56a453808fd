#include "msnp/trust.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace msnp::trust {

namespace {

using ServiceKey = std::pair<PeerId, std::string>;  // (provider, sname)

std::map<ServiceKey, double> rating_map(const ReputationData& rd) {
  std::map<ServiceKey, double> out;
  for (const auto& pr : rd.spr)
    for (const auto& rate : pr.rates)
      out[{pr.provider, rate.sname}] = rating_value(rate.rate);
  return out;
}

// Argmax with deterministic ties: higher key wins, equal keys fall back
// to ascending owner id.
template <typename Key>
const ReputationData* pick_best(
    const std::vector<const ReputationData*>& candidates,
    const std::function<Key(const ReputationData&)>& key) {
  const ReputationData* best = nullptr;
  Key best_key{};
  for (const ReputationData* rd : candidates) {
    const Key k = key(*rd);
    if (!best || k > best_key || (k == best_key && rd->owner < best->owner)) {
      best = rd;
      best_key = k;
    }
  }
  return best;
}

}  // namespace

const RatingLevel* ReputationData::find_rate(const PeerId& provider,
                                             const std::string& sname) const {
  for (const auto& pr : spr) {
    if (pr.provider != provider) continue;
    for (const auto& rate : pr.rates)
      if (rate.sname == sname) return &rate.rate;
  }
  return nullptr;
}

bool ReputationData::rated_provider(const PeerId& provider) const {
  for (const auto& pr : spr)
    if (pr.provider == provider && !pr.rates.empty()) return true;
  return false;
}

std::size_t ReputationData::total_rating_records() const {
  std::size_t n = 0;
  for (const auto& pr : spr) n += pr.rates.size();
  return n;
}

const std::set<PeerId>* ReputationData::rr_for(const SemanticType& stype) const {
  for (const auto& entry : rr)
    if (entry.stype == stype) return &entry.ids;
  return nullptr;
}

void validate(const ReputationData& rd) {
  std::set<std::string> stypes;
  for (const auto& entry : rd.rr) {
    if (!stypes.insert(entry.stype.name).second)
      throw std::invalid_argument("RD of " + rd.owner +
                                  ": duplicate RR entry for stype '" +
                                  entry.stype.name + "'");
    if (entry.ids.empty())
      throw std::invalid_argument("RD of " + rd.owner +
                                  ": empty RR entry for stype '" +
                                  entry.stype.name + "'");
  }
  std::set<PeerId> interacted;
  for (const auto& record : rd.ir) interacted.insert(record.provider);
  std::set<std::pair<PeerId, std::string>> rated;
  for (const auto& pr : rd.spr) {
    if (!pr.rates.empty() && !interacted.contains(pr.provider))
      throw std::invalid_argument("RD of " + rd.owner + ": rated provider " +
                                  pr.provider + " absent from IR");
    for (const auto& rate : pr.rates)
      if (!rated.insert({pr.provider, rate.sname}).second)
        throw std::invalid_argument("RD of " + rd.owner +
                                    ": duplicate rating of " + pr.provider +
                                    "/" + rate.sname);
  }
}

double rating_similarity(const ReputationData& a, const ReputationData& b) {
  if (auto sim = try_rating_similarity(a, b)) return *sim;
  // Re-run the checks to surface the precise error.
  const auto ra = rating_map(a), rb = rating_map(b);
  std::size_t common = 0;
  for (const auto& [key, value] : ra)
    if (rb.contains(key)) ++common;
  if (common < 2)
    throw std::runtime_error("insufficient overlap: fewer than 2 common services");
  throw std::runtime_error("undefined correlation: constant rating vector");
}

std::optional<double> try_rating_similarity(const ReputationData& a,
                                            const ReputationData& b) {
  const auto ra = rating_map(a), rb = rating_map(b);
  std::vector<double> va, vb;
  for (const auto& [key, value] : ra) {
    auto it = rb.find(key);
    if (it == rb.end()) continue;
    va.push_back(value);
    vb.push_back(it->second);
  }
  if (va.size() < 2) return std::nullopt;
  const double n = static_cast<double>(va.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    mean_a += va[i];
    mean_b += vb[i];
  }
  mean_a /= n;
  mean_b /= n;
  double num = 0.0, ssa = 0.0, ssb = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double da = va[i] - mean_a, db = vb[i] - mean_b;
    num += da * db;
    ssa += da * da;
    ssb += db * db;
  }
  if (ssa == 0.0 || ssb == 0.0) return std::nullopt;
  return num / std::sqrt(ssa * ssb);
}

PscPlausibility check_psc_plausibility(const PscList* psc,
                                       const PeerId& provider,
                                       const PscContext& ctx) {
  if (!psc) {
    for (const auto& rd : ctx.known_rds)
      if (rd.rated_provider(provider)) return PscPlausibility::Suspicious;
    return PscPlausibility::NewParticipant;
  }
  for (const auto& entry : psc->entries)
    if (ctx.friends.contains(entry.cid)) return PscPlausibility::Usable;

  // Credibility of every known peer, each computed over the others' RDs.
  std::map<PeerId, std::int64_t> cred;
  for (const auto& rd : ctx.known_rds) {
    std::int64_t n = 0;
    for (const auto& other : ctx.known_rds) {
      if (other.owner == rd.owner) continue;
      const auto* ids = other.rr_for(ctx.stype);
      if (ids && ids->contains(rd.owner)) ++n;
    }
    cred[rd.owner] = n;
  }
  std::int64_t threshold = 0;
  if (!cred.empty()) {
    std::vector<std::int64_t> values;
    values.reserve(cred.size());
    for (const auto& [id, n] : cred) values.push_back(n);
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(
        ctx.credibility_quantile * static_cast<double>(values.size())));
    threshold = values[rank == 0 ? 0 : rank - 1];
  }
  for (const auto& entry : psc->entries) {
    auto it = cred.find(entry.cid);
    if (it != cred.end() && it->second > 0 && it->second >= threshold)
      return PscPlausibility::Usable;
  }
  return PscPlausibility::Suspicious;
}

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::AF: return "af";
    case Scheme::AFOAF: return "afoaf";
    case Scheme::HEF: return "hef";
    case Scheme::HEFHEF: return "hefhef";
    case Scheme::MSF: return "msf";
    case Scheme::PublicNaive: return "naive";
    case Scheme::PublicExpOnly: return "exponly";
    case Scheme::PublicCreditOnly: return "creditonly";
    case Scheme::PublicProposed: return "proposed";
  }
  throw std::logic_error("bad Scheme");
}

TrustVerdict trust_af(const PeerId& provider, const std::string& sname,
                      const std::vector<ReputationData>& friends_rd) {
  TrustVerdict verdict;
  verdict.scheme = Scheme::AF;
  double sum = 0.0;
  for (const auto& rd : friends_rd) {
    const RatingLevel* rate = rd.find_rate(provider, sname);
    if (!rate) continue;
    sum += rating_value(*rate);
    verdict.recommenders.push_back(rd.owner);
  }
  if (verdict.recommenders.empty())
    throw std::runtime_error("no recommender: no friend rated the service");
  verdict.score = sum / static_cast<double>(verdict.recommenders.size());
  verdict.transactions = static_cast<std::int64_t>(friends_rd.size());
  return verdict;
}

TrustVerdict trust_afoaf(const PeerId& requester, const PeerId& provider,
                         const std::string& sname,
                         const std::vector<ReputationData>& friends_rd,
                         const FoafFetcher& fetch_foaf_rds) {
  TrustVerdict verdict;
  verdict.scheme = Scheme::AFOAF;
  // A FOAF reachable through several friends still counts once for the
  // mean; the fetches themselves all count.
  std::map<PeerId, double> foaf_ratings;
  for (const auto& rd : friends_rd) {
    const auto foaf_rds = fetch_foaf_rds(rd.owner);
    verdict.transactions += static_cast<std::int64_t>(foaf_rds.size());
    for (const auto& foaf : foaf_rds) {
      if (foaf.owner == requester || foaf.owner == provider) continue;
      const RatingLevel* rate = foaf.find_rate(provider, sname);
      if (rate) foaf_ratings.emplace(foaf.owner, rating_value(*rate));
    }
  }
  if (foaf_ratings.empty())
    throw std::runtime_error("no recommender: no FOAF rated the service");
  double sum = 0.0;
  for (const auto& [id, value] : foaf_ratings) {
    sum += value;
    verdict.recommenders.push_back(id);
  }
  verdict.score = sum / static_cast<double>(foaf_ratings.size());
  return verdict;
}

std::optional<TrustVerdict> trust_hef(
    const ReputationData* requester_rd, const PeerId& provider,
    const std::string& sname, const SemanticType& stype,
    const std::vector<ReputationData>& friends_rd) {
  std::vector<const ReputationData*> experienced;  // MFID
  for (const auto& rd : friends_rd)
    if (rd.find_rate(provider, sname)) experienced.push_back(&rd);
  if (experienced.empty()) return std::nullopt;

  // Narrow to the requester's recommended references for this stype when
  // that still leaves a candidate.
  if (requester_rd) {
    if (const auto* ids = requester_rd->rr_for(stype)) {
      std::vector<const ReputationData*> narrowed;
      for (const ReputationData* rd : experienced)
        if (ids->contains(rd->owner)) narrowed.push_back(rd);
      if (!narrowed.empty()) experienced = std::move(narrowed);
    }
  }

  const ReputationData* best = pick_best<std::size_t>(
      experienced, [](const ReputationData& rd) { return rd.total_rating_records(); });
  TrustVerdict verdict;
  verdict.scheme = Scheme::HEF;
  verdict.score = rating_value(*best->find_rate(provider, sname));
  verdict.recommenders = {best->owner};
  verdict.transactions = 1;  // one up-to-date rating fetch
  return verdict;
}

std::optional<TrustVerdict> trust_hefhef(
    const PeerId& requester, const PeerId& provider, const std::string& sname,
    const SemanticType& stype, const std::vector<ReputationData>& friends_rd,
    const FoafFetcher& fetch_foaf_rds) {
  if (friends_rd.empty()) return std::nullopt;
  std::vector<const ReputationData*> friends;
  friends.reserve(friends_rd.size());
  for (const auto& rd : friends_rd) friends.push_back(&rd);
  const ReputationData* hef = pick_best<std::int64_t>(
      friends,
      [&](const ReputationData& rd) { return stype_experience(rd, stype); });

  const auto hef_friends = fetch_foaf_rds(hef->owner);
  std::vector<const ReputationData*> raters;
  for (const auto& rd : hef_friends) {
    if (rd.owner == requester || rd.owner == provider) continue;
    if (rd.find_rate(provider, sname)) raters.push_back(&rd);
  }
  if (raters.empty()) return std::nullopt;

  const ReputationData* best = pick_best<std::int64_t>(
      raters,
      [&](const ReputationData& rd) { return stype_experience(rd, stype); });
  TrustVerdict verdict;
  verdict.scheme = Scheme::HEFHEF;
  verdict.score = rating_value(*best->find_rate(provider, sname));
  verdict.recommenders = {best->owner};
  verdict.transactions = static_cast<std::int64_t>(hef_friends.size());
  return verdict;
}

TrustVerdict trust_msf(const ReputationData& requester_rd,
                       const PeerId& provider, const std::string& sname,
                       const std::vector<ReputationData>& friends_rd) {
  const ReputationData* best = nullptr;
  double best_sim = 0.0;
  for (const auto& rd : friends_rd) {
    if (!rd.find_rate(provider, sname)) continue;
    const auto sim = try_rating_similarity(requester_rd, rd);
    if (!sim) continue;
    if (!best || *sim > best_sim ||
        (*sim == best_sim && rd.owner < best->owner)) {
      best = &rd;
      best_sim = *sim;
    }
  }
  if (!best)
    throw std::runtime_error(
        "no recommender: no similar friend rated the service");
  TrustVerdict verdict;
  verdict.scheme = Scheme::MSF;
  verdict.score = rating_value(*best->find_rate(provider, sname));
  verdict.recommenders = {best->owner};
  verdict.transactions = 1;
  return verdict;
}

std::int64_t credibility(const PeerId& p, const SemanticType& stype,
                         const std::vector<ReputationData>& crrd) {
  std::int64_t n = 0;
  for (const auto& rd : crrd) {
    if (rd.owner == p)
      throw std::invalid_argument("credibility: candidate's own RD in CRRD");
    const auto* ids = rd.rr_for(stype);
    if (ids && ids->contains(p)) ++n;
  }
  return n;
}

std::int64_t stype_experience(const ReputationData& rd,
                              const SemanticType& stype) {
  std::int64_t n = 0;
  for (const auto& record : rd.ir)
    if (record.stype == stype) ++n;
  return n;
}

namespace {

struct RecommenderScores {
  std::vector<std::int64_t> cred;
  std::vector<std::int64_t> exp;
  std::vector<double> tr;
};

RecommenderScores score_candidates(const std::vector<ReputationData>& candidates,
                                   const SemanticType& stype) {
  RecommenderScores out;
  const std::size_t n = candidates.size();
  out.cred.resize(n, 0);
  out.exp.resize(n, 0);
  out.tr.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto* ids = candidates[j].rr_for(stype);
      if (ids && ids->contains(candidates[i].owner)) ++out.cred[i];
    }
    out.exp[i] = stype_experience(candidates[i], stype);
  }
  std::int64_t cred_sum = 0, exp_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cred_sum += out.cred[i];
    exp_sum += out.exp[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double cred_part =
        cred_sum > 0 ? static_cast<double>(out.cred[i]) /
                           static_cast<double>(cred_sum)
                     : 0.0;
    const double exp_part =
        exp_sum > 0 ? static_cast<double>(out.exp[i]) /
                          static_cast<double>(exp_sum)
                    : 0.0;
    out.tr[i] = (cred_part + exp_part) / 2.0;
  }
  return out;
}

}  // namespace

double recommender_trust_score(const PeerId& phi,
                               const std::vector<ReputationData>& candidates,
                               const SemanticType& stype) {
  const auto scores = score_candidates(candidates, stype);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].owner == phi) return scores.tr[i];
  throw std::invalid_argument("recommender_trust_score: " + phi +
                              " not among candidates");
}

TrustVerdict trust_public(const PeerId& requester, const PeerId& provider,
                          const std::string& sname, const SemanticType& stype,
                          const std::vector<ReputationData>& proximal_rds,
                          PublicScheme scheme) {
  for (const auto& rd : proximal_rds)
    if (rd.owner == provider)
      throw std::invalid_argument(
          "trust_public: provider's own RD in the proximal set");

  std::vector<std::size_t> mpr;  // indices of proximal raters of the service
  for (std::size_t i = 0; i < proximal_rds.size(); ++i) {
    if (proximal_rds[i].owner == requester) continue;
    if (proximal_rds[i].find_rate(provider, sname)) mpr.push_back(i);
  }
  if (mpr.empty())
    throw std::runtime_error("no recommender: no proximal peer rated the service");

  TrustVerdict verdict;
  verdict.transactions = static_cast<std::int64_t>(proximal_rds.size());

  const auto rate_of = [&](std::size_t i) {
    return rating_value(*proximal_rds[i].find_rate(provider, sname));
  };
  const auto pick = [&](auto key) {
    std::size_t best = mpr.front();
    for (std::size_t i : mpr) {
      if (key(i) > key(best) ||
          (key(i) == key(best) && proximal_rds[i].owner < proximal_rds[best].owner))
        best = i;
    }
    return best;
  };

  switch (scheme) {
    case PublicScheme::Naive: {
      verdict.scheme = Scheme::PublicNaive;
      double sum = 0.0;
      for (std::size_t i : mpr) {
        sum += rate_of(i);
        verdict.recommenders.push_back(proximal_rds[i].owner);
      }
      verdict.score = sum / static_cast<double>(mpr.size());
      return verdict;
    }
    case PublicScheme::ExpOnly: {
      verdict.scheme = Scheme::PublicExpOnly;
      const std::size_t best = pick([&](std::size_t i) {
        return stype_experience(proximal_rds[i], stype);
      });
      verdict.score = rate_of(best);
      verdict.recommenders = {proximal_rds[best].owner};
      return verdict;
    }
    case PublicScheme::CreditOnly: {
      verdict.scheme = Scheme::PublicCreditOnly;
      const auto scores = score_candidates(proximal_rds, stype);
      const std::size_t best =
          pick([&](std::size_t i) { return scores.cred[i]; });
      verdict.score = rate_of(best);
      verdict.recommenders = {proximal_rds[best].owner};
      return verdict;
    }
    case PublicScheme::Proposed: {
      verdict.scheme = Scheme::PublicProposed;
      const auto scores = score_candidates(proximal_rds, stype);
      const std::size_t best = pick([&](std::size_t i) { return scores.tr[i]; });
      verdict.score = rate_of(best);
      verdict.recommenders = {proximal_rds[best].owner};
      return verdict;
    }
  }
  throw std::logic_error("bad PublicScheme");
}

bool dishonesty_flag(const PscList& provider_psc,
                     const ReputationData& rater_rd, const PeerId& provider) {
  if (!rater_rd.rated_provider(provider)) return false;
  for (const auto& entry : provider_psc.entries)
    if (entry.cid == rater_rd.owner) return false;
  return true;
}

double cpi(double accuracy, double transactions) {
  if (transactions < 1.0)
    throw std::invalid_argument("cpi: transactions must be >= 1");
  return accuracy / transactions;
}

TrustVerdict run_algorithm1(const ReputationData& requester_rd,
                            const PeerId& provider, const std::string& sname,
                            const SemanticType& stype,
                            const std::vector<ReputationData>& friends_rd,
                            const FoafFetcher& fetch_foaf_rds,
                            const std::vector<ReputationData>& proximal_rds,
                            PublicScheme public_scheme) {
  if (auto verdict =
          trust_hef(&requester_rd, provider, sname, stype, friends_rd))
    return *verdict;
  if (auto verdict = trust_hefhef(requester_rd.owner, provider, sname, stype,
                                  friends_rd, fetch_foaf_rds))
    return *verdict;
  return trust_public(requester_rd.owner, provider, sname, stype, proximal_rds,
                      public_scheme);
}

// --- JSON persistence -------------------------------------------------

namespace {

using nlohmann::json;

json to_json(const InteractionRecord& record) {
  return json{{"provider", record.provider},
              {"sname", record.sname},
              {"stype", record.stype.name},
              {"timestamp", record.timestamp}};
}

InteractionRecord interaction_from_json(const json& j) {
  InteractionRecord record;
  record.provider = j.at("provider").get<std::string>();
  record.sname = j.at("sname").get<std::string>();
  record.stype.name = j.at("stype").get<std::string>();
  record.timestamp = j.value("timestamp", std::int64_t{0});
  return record;
}

}  // namespace

ReputationData load_rd_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open RD file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed RD JSON in " + path + ": " + e.what());
  }
  try {
    ReputationData rd;
    rd.owner = j.at("owner").get<std::string>();
    for (const auto& jp : j.at("spr")) {
      ProviderRating pr;
      pr.provider = jp.at("provider").get<std::string>();
      for (const auto& jr : jp.at("rates")) {
        ServiceRate rate;
        rate.sname = jr.at("sname").get<std::string>();
        rate.stype.name = jr.at("stype").get<std::string>();
        const auto level = rating_from_value(jr.at("rate").get<double>());
        if (!level) throw DataError("invalid rating value in " + path);
        rate.rate = *level;
        pr.rates.push_back(rate);
      }
      rd.spr.push_back(std::move(pr));
    }
    for (const auto& je : j.at("rr")) {
      RecommendedReference entry;
      entry.stype.name = je.at("stype").get<std::string>();
      for (const auto& id : je.at("ids")) entry.ids.insert(id.get<std::string>());
      rd.rr.push_back(std::move(entry));
    }
    for (const auto& ji : j.at("ir")) rd.ir.push_back(interaction_from_json(ji));
    validate(rd);
    return rd;
  } catch (const json::exception& e) {
    throw DataError("malformed RD JSON in " + path + ": " + e.what());
  }
}

void save_rd_json(const ReputationData& rd, const std::string& path) {
  json j;
  j["owner"] = rd.owner;
  j["spr"] = json::array();
  for (const auto& pr : rd.spr) {
    json jp{{"provider", pr.provider}, {"rates", json::array()}};
    for (const auto& rate : pr.rates)
      jp["rates"].push_back(json{{"sname", rate.sname},
                                 {"stype", rate.stype.name},
                                 {"rate", rating_value(rate.rate)}});
    j["spr"].push_back(std::move(jp));
  }
  j["rr"] = json::array();
  for (const auto& entry : rd.rr) {
    json je{{"stype", entry.stype.name}, {"ids", json::array()}};
    for (const auto& id : entry.ids) je["ids"].push_back(id);
    j["rr"].push_back(std::move(je));
  }
  j["ir"] = json::array();
  for (const auto& record : rd.ir) j["ir"].push_back(to_json(record));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write RD file: " + path);
  out << j.dump(2) << '\n';
}

PscList load_psc_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open PSC file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed PSC JSON in " + path + ": " + e.what());
  }
  try {
    PscList psc;
    psc.provider = j.value("provider", std::string{});
    const json& entries = j.is_array() ? j : j.at("entries");
    std::set<PeerId> cids;
    for (const auto& je : entries) {
      PscEntry entry;
      entry.cid = je.at("cid").get<std::string>();
      if (!cids.insert(entry.cid).second)
        throw DataError("duplicate cid '" + entry.cid + "' in " + path);
      for (const auto& ji : je.at("interactions"))
        entry.interactions.push_back(interaction_from_json(ji));
      psc.entries.push_back(std::move(entry));
    }
    return psc;
  } catch (const json::exception& e) {
    throw DataError("malformed PSC JSON in " + path + ": " + e.what());
  }
}

void save_psc_json(const PscList& psc, const std::string& path) {
  json entries = json::array();
  for (const auto& entry : psc.entries) {
    json je{{"cid", entry.cid}, {"interactions", json::array()}};
    for (const auto& record : entry.interactions)
      je["interactions"].push_back(to_json(record));
    entries.push_back(std::move(je));
  }
  json j{{"provider", psc.provider}, {"entries", std::move(entries)}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write PSC file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace msnp::trust
