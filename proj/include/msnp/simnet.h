#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "msnp/domain.h"

namespace msnp::simnet {

// Latency model: fixed rtt per exchange plus size/bandwidth transfer
// time plus a linear parse cost; matchmaking adds match_ms per SDM.
// Defaults are calibrated so the pull/push makespan crossover falls
// between 50 and 100 providers (see data/sim_default.cfg).
struct SimConfig {
  std::size_t n_providers = 0;
  double matched_fraction = 0.2;  // share of providers offering the wanted type
  std::int64_t sdm_bytes = 6144;
  std::int64_t owl_bytes = 12288;
  double rtt_ms = 20.0;
  double bandwidth_bytes_per_ms = 1024.0;
  double parse_ms_per_kb = 4.0;
  double match_ms = 5.0;
  double discovery_timeout_ms = 600000.0;
  // Window over which providers choose their advertisement time in the
  // push-based models.
  double announce_window_ms = 8000.0;
  // Providers join spread evenly over this window (0 = all present at
  // t=0; the resource experiments deploy 5 providers/s for 100 s).
  double deploy_window_ms = 0.0;
  // Share of providers offering a cached-SDM link service (pull only).
  double cached_fraction = 0.0;
  std::uint64_t seed = 0;
};

void validate(const SimConfig& config);
// Key-value config file, one `key = value` per line, '#' comments.
SimConfig load_config(const std::string& path);
std::string config_echo(const SimConfig& config);

enum class EventKind {
  Announce,
  FetchSdm,
  SdmArrived,
  MatchDone,
  AdvertisePush,
  PrefRequest,
  PrefReply,
  TrustDone,
  Invoke,
};

struct SimEvent {
  double time_ms = 0.0;
  EventKind kind = EventKind::Announce;
  PeerId src;
  PeerId dst;
  std::int64_t payload_bytes = 0;
};

struct SimResult {
  // Time until all matched providers are discovered and trust-checked.
  double makespan_ms = 0.0;
  // Requester-side accumulated parse+match milliseconds.
  double cpu_ms = 0.0;
  // Peak bytes of concurrently retained metadata.
  std::int64_t ram_bytes_peak = 0;
  std::int64_t messages = 0;
  std::set<PeerId> discovered;
  bool timed_out = false;
};

enum class Model { Pull, Push, PrefPush, Hybrid };

const char* model_name(Model model);
Model model_from_name(const std::string& name);

// Requester actively fetches SDM+OWL from each provider in turn,
// parsing and matching serially, following cached-SDM links when a
// provider offers them, until done or the discovery timeout fires.
SimResult run_pull(const SimConfig& config);

// Providers fetch the requester's SDM, then push their own at a
// provider-chosen time inside the announcement window; the requester
// parses arrivals serially.
SimResult run_push(const SimConfig& config);

// Providers learn the requester's preferred service type with the SDM
// fetch, match on their side, and only matched providers push.
SimResult run_prefpush(const SimConfig& config,
                       const SemanticType& predicted_type);

// Providers supporting PrefPush behave as in run_prefpush; the rest are
// discovered by a concurrent pull lane.
SimResult run_hybrid(const SimConfig& config,
                     const SemanticType& predicted_type,
                     double prefpush_support_fraction);

SimResult run_model(Model model, const SimConfig& config,
                    const SemanticType& predicted_type,
                    double hybrid_fraction = 0.5);

}  // namespace msnp::simnet
