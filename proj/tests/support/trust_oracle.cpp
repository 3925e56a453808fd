#include "support/trust_oracle.h"

namespace msnp::oracle {

long long credibility_count(const PeerId& p, const SemanticType& stype,
                            const std::vector<trust::ReputationData>& others) {
  long long n = 0;
  for (const auto& rd : others) {
    if (rd.owner == p) continue;
    for (const auto& entry : rd.rr) {
      if (entry.stype.name != stype.name) continue;
      for (const auto& id : entry.ids)
        if (id == p) ++n;
    }
  }
  return n;
}

long long experience_count(const trust::ReputationData& rd,
                           const SemanticType& stype) {
  long long n = 0;
  for (const auto& record : rd.ir)
    if (record.stype.name == stype.name) ++n;
  return n;
}

double trust_score(const PeerId& phi,
                   const std::vector<trust::ReputationData>& candidates,
                   const SemanticType& stype) {
  long long cred_sum = 0, exp_sum = 0, cred_phi = 0, exp_phi = 0;
  for (const auto& rd : candidates) {
    const long long cred = credibility_count(rd.owner, stype, candidates);
    const long long exp = experience_count(rd, stype);
    cred_sum += cred;
    exp_sum += exp;
    if (rd.owner == phi) {
      cred_phi = cred;
      exp_phi = exp;
    }
  }
  double total = 0.0;
  if (cred_sum > 0)
    total += static_cast<double>(cred_phi) / static_cast<double>(cred_sum);
  if (exp_sum > 0)
    total += static_cast<double>(exp_phi) / static_cast<double>(exp_sum);
  return total / 2.0;
}

std::optional<PublicPick> public_proposed(
    const PeerId& provider, const std::string& sname,
    const SemanticType& stype,
    const std::vector<trust::ReputationData>& proximal) {
  const RatingLevel* picked_rate = nullptr;
  PeerId picked;
  double picked_tr = 0.0;
  for (const auto& rd : proximal) {
    const RatingLevel* rate = nullptr;
    for (const auto& pr : rd.spr) {
      if (pr.provider != provider) continue;
      for (const auto& r : pr.rates)
        if (r.sname == sname) rate = &r.rate;
    }
    if (!rate) continue;
    const double tr = trust_score(rd.owner, proximal, stype);
    if (!picked_rate || tr > picked_tr ||
        (tr == picked_tr && rd.owner < picked)) {
      picked_rate = rate;
      picked = rd.owner;
      picked_tr = tr;
    }
  }
  if (!picked_rate) return std::nullopt;
  return PublicPick{picked, rating_value(*picked_rate)};
}

}  // namespace msnp::oracle
