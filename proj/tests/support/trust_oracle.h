#pragma once

#include <optional>
#include <vector>

#include "msnp/trust.h"

// Explicit-loop recomputation of credibility, stype experience and the
// combined recommender trust score, independent of the library path.
namespace msnp::oracle {

long long credibility_count(const PeerId& p, const SemanticType& stype,
                            const std::vector<trust::ReputationData>& others);
long long experience_count(const trust::ReputationData& rd,
                           const SemanticType& stype);
double trust_score(const PeerId& phi,
                   const std::vector<trust::ReputationData>& candidates,
                   const SemanticType& stype);

struct PublicPick {
  PeerId recommender;
  double score = 0.0;
};

// Re-derives the proposed public-scheme selection; empty when no
// proximal peer rated the service.
std::optional<PublicPick> public_proposed(
    const PeerId& provider, const std::string& sname,
    const SemanticType& stype,
    const std::vector<trust::ReputationData>& proximal);

}  // namespace msnp::oracle
