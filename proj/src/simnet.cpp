#include "msnp/simnet.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace msnp::simnet {

void validate(const SimConfig& config) {
  if (!(config.matched_fraction > 0.0 && config.matched_fraction < 1.0))
    throw std::invalid_argument("matched_fraction must lie in (0,1)");
  if (config.sdm_bytes < 0 || config.owl_bytes < 0)
    throw std::invalid_argument("metadata byte sizes must be >= 0");
  if (config.rtt_ms <= 0 || config.bandwidth_bytes_per_ms <= 0 ||
      config.parse_ms_per_kb <= 0 || config.match_ms <= 0 ||
      config.discovery_timeout_ms <= 0)
    throw std::invalid_argument("rates and latencies must be > 0");
  if (config.announce_window_ms < 0 || config.deploy_window_ms < 0)
    throw std::invalid_argument("windows must be >= 0");
  if (config.cached_fraction < 0 || config.cached_fraction > 1)
    throw std::invalid_argument("cached_fraction must lie in [0,1]");
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sim config: " + path);
  SimConfig config;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string key, eq, value;
    if (!(row >> key)) continue;
    if (!(row >> eq >> value) || eq != "=")
      throw DataError("sim config line must read `key = value`: " + line);
    try {
      if (key == "n_providers")
        config.n_providers = static_cast<std::size_t>(std::stoull(value));
      else if (key == "matched_fraction") config.matched_fraction = std::stod(value);
      else if (key == "sdm_bytes") config.sdm_bytes = std::stoll(value);
      else if (key == "owl_bytes") config.owl_bytes = std::stoll(value);
      else if (key == "rtt_ms") config.rtt_ms = std::stod(value);
      else if (key == "bandwidth_bytes_per_ms")
        config.bandwidth_bytes_per_ms = std::stod(value);
      else if (key == "parse_ms_per_kb") config.parse_ms_per_kb = std::stod(value);
      else if (key == "match_ms") config.match_ms = std::stod(value);
      else if (key == "discovery_timeout_ms")
        config.discovery_timeout_ms = std::stod(value);
      else if (key == "announce_window_ms")
        config.announce_window_ms = std::stod(value);
      else if (key == "deploy_window_ms") config.deploy_window_ms = std::stod(value);
      else if (key == "cached_fraction") config.cached_fraction = std::stod(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else throw DataError("unknown sim config key: " + key);
    } catch (const std::invalid_argument&) {
      throw DataError("bad sim config value for " + key + ": " + value);
    }
  }
  validate(config);
  return config;
}

std::string config_echo(const SimConfig& config) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "n_providers=%zu;matched_fraction=%g;sdm_bytes=%lld;"
                "owl_bytes=%lld;rtt_ms=%g;bandwidth_bytes_per_ms=%g;"
                "parse_ms_per_kb=%g;match_ms=%g;discovery_timeout_ms=%g;"
                "announce_window_ms=%g;deploy_window_ms=%g;cached_fraction=%g;"
                "seed=%llu",
                config.n_providers, config.matched_fraction,
                static_cast<long long>(config.sdm_bytes),
                static_cast<long long>(config.owl_bytes), config.rtt_ms,
                config.bandwidth_bytes_per_ms, config.parse_ms_per_kb,
                config.match_ms, config.discovery_timeout_ms,
                config.announce_window_ms, config.deploy_window_ms,
                config.cached_fraction,
                static_cast<unsigned long long>(config.seed));
  return buf;
}

const char* model_name(Model model) {
  switch (model) {
    case Model::Pull: return "pull";
    case Model::Push: return "push";
    case Model::PrefPush: return "prefpush";
    case Model::Hybrid: return "hybrid";
  }
  throw std::logic_error("bad Model");
}

Model model_from_name(const std::string& name) {
  if (name == "pull") return Model::Pull;
  if (name == "push") return Model::Push;
  if (name == "prefpush") return Model::PrefPush;
  if (name == "hybrid") return Model::Hybrid;
  throw std::invalid_argument("unknown discovery model: " + name);
}

namespace {

constexpr const char* kRequester = "requester";

struct Provider {
  PeerId id;
  ServiceDescription sdm;
  bool matched = false;
  bool prefpush_capable = false;
  double deploy_ms = 0.0;
  double jitter_frac = 0.0;  // position inside the announcement window
};

// Marks `count` of `n` slots, spread evenly.
std::vector<bool> spread_flags(std::size_t n, std::size_t count) {
  std::vector<bool> flags(n, false);
  for (std::size_t k = 0; k < n; ++k)
    if ((k + 1) * count / n > k * count / n) flags[k] = true;
  return flags;
}

std::vector<Provider> build_world(const SimConfig& config,
                                  const SemanticType& wanted) {
  const std::size_t n = config.n_providers;
  std::vector<Provider> providers(n);
  if (n == 0) return providers;
  const auto matched = spread_flags(
      n, static_cast<std::size_t>(std::llround(
             config.matched_fraction * static_cast<double>(n))));
  const auto cached = spread_flags(
      n, static_cast<std::size_t>(std::llround(
             config.cached_fraction * static_cast<double>(n))));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    Provider& p = providers[k];
    char buf[24];
    std::snprintf(buf, sizeof buf, "p%04zu", k);
    p.id = buf;
    p.matched = matched[k];
    p.deploy_ms = config.deploy_window_ms > 0
                      ? static_cast<double>(k + 1) * config.deploy_window_ms /
                            static_cast<double>(n)
                      : 0.0;
    p.jitter_frac = unit(rng);
    p.sdm.provider = p.id;
    p.sdm.sdm_bytes = config.sdm_bytes;
    p.sdm.owl_bytes = config.owl_bytes;
    p.sdm.cached_sdm_available = cached[k];
    p.sdm.services.push_back(
        {"svc", p.matched ? wanted : SemanticType{"Other"}});
  }
  return providers;
}

Ontology world_ontology(const SemanticType& wanted) {
  return Ontology::from_entries(
      {{"Service", ""}, {wanted.name, "Service"}, {"Other", "Service"}});
}

struct QueueItem {
  SimEvent event;
  std::uint64_t seq = 0;
};

struct QueueOrder {
  bool operator()(const QueueItem& a, const QueueItem& b) const {
    if (a.event.time_ms != b.event.time_ms)
      return a.event.time_ms > b.event.time_ms;
    return a.seq > b.seq;  // ties by insertion order
  }
};

// Min-heap on (time, insertion order); popping earlier than the last
// popped time is a scheduling bug.
class EventQueue {
 public:
  void push(SimEvent event) {
    if (event.time_ms < last_popped_)
      throw std::logic_error("event scheduled in the past");
    heap_.push(QueueItem{std::move(event), next_seq_++});
  }
  bool empty() const { return heap_.empty(); }
  SimEvent pop() {
    QueueItem item = heap_.top();
    heap_.pop();
    if (item.event.time_ms < last_popped_)
      throw std::logic_error("event queue out of time order");
    last_popped_ = item.event.time_ms;
    return item.event;
  }

 private:
  std::priority_queue<QueueItem, std::vector<QueueItem>, QueueOrder> heap_;
  std::uint64_t next_seq_ = 0;
  double last_popped_ = 0.0;
};

// The pull lane fetches its providers strictly one at a time; cached-SDM
// links pull in earlier-deployed, not-yet-seen lane members as a batch.
struct PullLane {
  std::vector<std::size_t> order;
  std::vector<bool> pending;  // true = lane member not yet processed
  std::size_t cursor = 0;
  std::size_t batch_remaining = 0;

  explicit PullLane(std::size_t n) : pending(n, false) {}

  void assign(std::vector<std::size_t> indices) {
    order = std::move(indices);
    for (std::size_t k : order) pending[k] = true;
  }
};

class Sim {
 public:
  Sim(const SimConfig& config, std::vector<Provider> world,
      const SemanticType& wanted, bool pref_lane_active)
      : config_(config), providers_(std::move(world)),
        ontology_(world_ontology(wanted)), wanted_(wanted),
        pref_lane_(pref_lane_active), pull_lane_(providers_.size()) {
    for (std::size_t k = 0; k < providers_.size(); ++k) {
      index_of_[providers_[k].id] = k;
      if (providers_[k].matched) ++matched_total_;
    }
  }

  void enable_pull(std::vector<std::size_t> indices) {
    pull_active_ = true;
    pull_lane_.assign(std::move(indices));
  }
  void set_push_kind(bool plain_push) { plain_push_ = plain_push; }

  SimResult run() {
    for (const auto& p : providers_)
      queue_.push({p.deploy_ms, EventKind::Announce, p.id, kRequester, 0});
    for (const auto& p : providers_) {
      if (pref_lane_ && p.prefpush_capable)
        queue_.push({p.deploy_ms, EventKind::PrefRequest, p.id, kRequester, 0});
      else if (plain_push_)
        queue_.push({p.deploy_ms, EventKind::FetchSdm, p.id, kRequester, 0});
    }
    if (pull_active_) schedule_next_pull(0.0);

    while (!queue_.empty()) {
      const SimEvent ev = queue_.pop();
      if (ev.time_ms > config_.discovery_timeout_ms) break;
      dispatch(ev);
    }

    if (matched_total_ == 0) {
      result_.makespan_ms = 0.0;
    } else if (matched_found_ == matched_total_) {
      result_.makespan_ms = last_trust_ms_;
    } else {
      result_.timed_out = true;
      result_.makespan_ms = config_.discovery_timeout_ms;
    }
    return result_;
  }

 private:
  double transfer_ms(std::int64_t bytes) const {
    return config_.rtt_ms +
           static_cast<double>(bytes) / config_.bandwidth_bytes_per_ms;
  }
  double parse_cost_ms(std::int64_t bytes) const {
    return config_.parse_ms_per_kb * static_cast<double>(bytes) / 1024.0;
  }
  std::int64_t sdm_owl(const Provider& p) const {
    return p.sdm.sdm_bytes + p.sdm.owl_bytes;
  }
  void note_ram() {
    result_.ram_bytes_peak =
        std::max(result_.ram_bytes_peak, queued_bytes_ + retained_bytes_);
  }
  bool matches(const Provider& p) const {
    for (const auto& svc : p.sdm.services)
      if (type_matches(wanted_, svc.stype, ontology_)) return true;
    return false;
  }
  // Advertisement time: uniformly inside what remains of the provider's
  // announcement window once it is ready to push.
  double advertise_time(const Provider& p, double ready_ms) const {
    const double window_end = p.deploy_ms + config_.announce_window_ms;
    return ready_ms + p.jitter_frac * std::max(0.0, window_end - ready_ms);
  }
  void trust_and_invoke(const Provider& p, double now) {
    queue_.push({now, EventKind::TrustDone, kRequester, p.id, 0});
    queue_.push({now, EventKind::Invoke, kRequester, p.id, 0});
    result_.discovered.insert(p.id);
    ++matched_found_;
    last_trust_ms_ = std::max(last_trust_ms_, now);
  }

  void schedule_next_pull(double now) {
    auto& lane = pull_lane_;
    while (lane.cursor < lane.order.size() && !lane.pending[lane.order[lane.cursor]])
      ++lane.cursor;
    if (lane.cursor >= lane.order.size()) return;
    const std::size_t k = lane.order[lane.cursor];
    const double start = std::max(now, providers_[k].deploy_ms);
    queue_.push({start, EventKind::FetchSdm, kRequester, providers_[k].id,
                 sdm_owl(providers_[k])});
  }

  // Providers keep caching the SDMs of agents they have discovered, so
  // the cache offered at `now` covers every agent deployed by then that
  // the requester has not fetched itself.
  std::vector<std::size_t> cached_batch(std::size_t from, double now) const {
    std::vector<std::size_t> batch;
    for (std::size_t k : pull_lane_.order)
      if (pull_lane_.pending[k] && k != from &&
          providers_[k].deploy_ms <= now)
        batch.push_back(k);
    return batch;
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::Announce:
        ++result_.messages;
        break;
      case EventKind::PrefRequest: on_pref_request(ev); break;
      case EventKind::PrefReply: on_pref_reply(ev); break;
      case EventKind::FetchSdm: on_fetch(ev); break;
      case EventKind::AdvertisePush: on_advertise(ev); break;
      case EventKind::SdmArrived: on_arrival(ev); break;
      case EventKind::MatchDone: on_match_done(ev); break;
      case EventKind::TrustDone:
      case EventKind::Invoke:
        break;
    }
  }

  // Provider asks for the requester's SDM plus preferred type; the reply
  // carries both in one exchange.
  void on_pref_request(const SimEvent& ev) {
    result_.messages += 2;  // request and reply
    queue_.push({ev.time_ms + transfer_ms(config_.sdm_bytes),
                 EventKind::PrefReply, kRequester, ev.src, config_.sdm_bytes});
  }

  // Provider-side matchmaking; only matched providers advertise.
  void on_pref_reply(const SimEvent& ev) {
    const Provider& p = providers_[index_of_.at(ev.dst)];
    const double decided = ev.time_ms + config_.match_ms;
    if (matches(p)) {
      const double at = std::max(advertise_time(p, ev.time_ms), decided);
      queue_.push({at, EventKind::AdvertisePush, p.id, kRequester,
                   p.sdm.sdm_bytes});
    }
  }

  void on_fetch(const SimEvent& ev) {
    result_.messages += 2;  // request and response
    if (ev.src == kRequester) {
      // Pull lane: response carries the provider's SDM+OWL.
      queue_.push({ev.time_ms + transfer_ms(ev.payload_bytes),
                   EventKind::SdmArrived, ev.dst, kRequester,
                   ev.payload_bytes});
    } else {
      // Push lane: the provider fetches the requester's SDM, then picks
      // its advertisement slot.
      const Provider& p = providers_[index_of_.at(ev.src)];
      const double fetched = ev.time_ms + transfer_ms(config_.sdm_bytes);
      queue_.push({advertise_time(p, fetched), EventKind::AdvertisePush, p.id,
                   kRequester, sdm_owl(p)});
    }
  }

  void on_advertise(const SimEvent& ev) {
    ++result_.messages;  // one push transmission; arrival is not re-counted
    queue_.push({ev.time_ms + transfer_ms(ev.payload_bytes),
                 EventKind::SdmArrived, ev.src, kRequester, ev.payload_bytes});
  }

  void on_arrival(const SimEvent& ev) {
    const std::size_t k = index_of_.at(ev.src);
    const Provider& p = providers_[k];

    if (pref_lane_ && p.prefpush_capable) {
      // Already matched on the provider side: no requester parse, the
      // trust check gates invocation.
      retained_bytes_ += ev.payload_bytes;
      note_ram();
      trust_and_invoke(p, ev.time_ms);
      return;
    }
    if (plain_push_) {
      queued_bytes_ += ev.payload_bytes;
      note_ram();
      const double start = std::max(ev.time_ms, requester_free_ms_);
      const double cost = parse_cost_ms(ev.payload_bytes) + config_.match_ms;
      requester_free_ms_ = start + cost;
      result_.cpu_ms += cost;
      queue_.push({start + cost, EventKind::MatchDone, kRequester, p.id,
                   ev.payload_bytes});
      return;
    }
    // Pull lane direct fetch: retained for the session, parsed serially.
    retained_bytes_ += ev.payload_bytes;
    note_ram();
    const double cost = parse_cost_ms(ev.payload_bytes) + config_.match_ms;
    result_.cpu_ms += cost;
    queue_.push({ev.time_ms + cost, EventKind::MatchDone, kRequester, p.id,
                 ev.payload_bytes});
  }

  void on_match_done(const SimEvent& ev) {
    const std::size_t k = index_of_.at(ev.dst);
    const Provider& p = providers_[k];

    if (plain_push_ && !(pref_lane_ && p.prefpush_capable)) {
      queued_bytes_ -= ev.payload_bytes;
      if (matches(p)) {
        retained_bytes_ += ev.payload_bytes;
        trust_and_invoke(p, ev.time_ms);
      }
      note_ram();
      return;
    }

    // Pull lane.
    pull_lane_.pending[k] = false;
    if (matches(p)) trust_and_invoke(p, ev.time_ms);

    if (pull_lane_.batch_remaining > 0) {
      if (--pull_lane_.batch_remaining == 0) schedule_next_pull(ev.time_ms);
      return;
    }
    if (p.sdm.cached_sdm_available) {
      const auto batch = cached_batch(k, ev.time_ms);
      if (!batch.empty()) {
        start_cached_batch(batch, ev.time_ms);
        return;
      }
    }
    schedule_next_pull(ev.time_ms);
  }

  // One exchange retrieves every cached SDM; they parse sequentially in
  // provider order. Cached copies do not chain further links.
  void start_cached_batch(const std::vector<std::size_t>& batch, double now) {
    std::int64_t total = 0;
    for (std::size_t j : batch) total += sdm_owl(providers_[j]);
    result_.messages += 2;
    const double arrival = now + transfer_ms(total);
    retained_bytes_ += total;
    note_ram();
    double done = arrival;
    for (std::size_t j : batch) {
      const Provider& q = providers_[j];
      const double cost = parse_cost_ms(sdm_owl(q)) + config_.match_ms;
      done += cost;
      result_.cpu_ms += cost;
      queue_.push({done, EventKind::MatchDone, kRequester, q.id, sdm_owl(q)});
    }
    pull_lane_.batch_remaining = batch.size();
  }

  const SimConfig& config_;
  std::vector<Provider> providers_;
  const Ontology ontology_;
  const SemanticType wanted_;
  const bool pref_lane_;
  bool plain_push_ = false;
  bool pull_active_ = false;
  PullLane pull_lane_;
  std::map<PeerId, std::size_t> index_of_;

  EventQueue queue_;
  SimResult result_;
  std::int64_t queued_bytes_ = 0;
  std::int64_t retained_bytes_ = 0;
  double requester_free_ms_ = 0.0;
  std::size_t matched_total_ = 0;
  std::size_t matched_found_ = 0;
  double last_trust_ms_ = 0.0;
};

}  // namespace

SimResult run_pull(const SimConfig& config) {
  validate(config);
  const SemanticType wanted{"cType"};
  Sim sim(config, build_world(config, wanted), wanted, false);
  std::vector<std::size_t> all(config.n_providers);
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  sim.enable_pull(std::move(all));
  return sim.run();
}

SimResult run_push(const SimConfig& config) {
  validate(config);
  const SemanticType wanted{"cType"};
  Sim sim(config, build_world(config, wanted), wanted, false);
  sim.set_push_kind(true);
  return sim.run();
}

SimResult run_prefpush(const SimConfig& config,
                       const SemanticType& predicted_type) {
  validate(config);
  auto world = build_world(config, predicted_type);
  for (auto& p : world) p.prefpush_capable = true;
  Sim sim(config, std::move(world), predicted_type, true);
  return sim.run();
}

SimResult run_hybrid(const SimConfig& config,
                     const SemanticType& predicted_type,
                     double prefpush_support_fraction) {
  validate(config);
  if (prefpush_support_fraction < 0 || prefpush_support_fraction > 1)
    throw std::invalid_argument("prefpush support fraction must lie in [0,1]");
  auto world = build_world(config, predicted_type);
  const auto support = spread_flags(
      world.size(),
      static_cast<std::size_t>(std::llround(
          prefpush_support_fraction * static_cast<double>(world.size()))));
  std::vector<std::size_t> pulled;
  for (std::size_t k = 0; k < world.size(); ++k) {
    world[k].prefpush_capable = support[k];
    if (!support[k]) pulled.push_back(k);
  }
  Sim sim(config, std::move(world), predicted_type, true);
  sim.enable_pull(std::move(pulled));
  return sim.run();
}

SimResult run_model(Model model, const SimConfig& config,
                    const SemanticType& predicted_type,
                    double hybrid_fraction) {
  switch (model) {
    case Model::Pull: return run_pull(config);
    case Model::Push: return run_push(config);
    case Model::PrefPush: return run_prefpush(config, predicted_type);
    case Model::Hybrid:
      return run_hybrid(config, predicted_type, hybrid_fraction);
  }
  throw std::logic_error("bad Model");
}

}  // namespace msnp::simnet
