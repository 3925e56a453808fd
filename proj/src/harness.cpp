#include "msnp/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace msnp::harness {

namespace {

// Independent experiment cells may run in parallel; MSNP_SIM_THREADS
// caps the worker count (default 1). Results land in preallocated
// slots, so assembly order never depends on scheduling.
void parallel_cells(std::size_t count,
                    const std::function<void(std::size_t)>& cell) {
  std::size_t threads = 1;
  if (const char* env = std::getenv("MSNP_SIM_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    threads = static_cast<std::size_t>(std::clamp(parsed, 1L, 64L));
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) cell(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        cell(i);
    });
  for (auto& worker : pool) worker.join();
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

}  // namespace

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  out << "# experiment = " << report.experiment << '\n';
  out << "# config = " << report.config_echo << '\n';
  out << "# seeds = " << join_seeds(report.seeds) << '\n';
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i > 0) out << ',';
    out << report.columns[i];
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

void write_json(const ExperimentReport& report, const std::string& path) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["config"] = report.config_echo;
  j["seeds"] = report.seeds;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json jr;
    for (std::size_t i = 0; i < report.columns.size() && i < row.size(); ++i)
      jr[report.columns[i]] = row[i];
    j["rows"].push_back(std::move(jr));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  out << j.dump(2) << '\n';
}

// --- discovery sweep --------------------------------------------------------

DiscoverySweep exp_discovery_sweep(const simnet::SimConfig& base,
                                   const std::vector<std::size_t>& n_values,
                                   const std::vector<simnet::Model>& models,
                                   const std::vector<std::uint64_t>& seeds,
                                   double hybrid_fraction) {
  if (n_values.empty() || models.empty() || seeds.empty())
    throw std::invalid_argument("discovery sweep needs n values, models, seeds");

  DiscoverySweep sweep;
  for (std::uint64_t seed : seeds)
    for (std::size_t n : n_values)
      for (simnet::Model model : models)
        sweep.runs.push_back({n, model, seed, {}});

  const SemanticType predicted{"cType"};
  parallel_cells(sweep.runs.size(), [&](std::size_t i) {
    DiscoveryRun& run = sweep.runs[i];
    simnet::SimConfig config = base;
    config.n_providers = run.n_providers;
    config.seed = run.seed;
    run.result = simnet::run_model(run.model, config, predicted, hybrid_fraction);
  });

  for (std::size_t n : n_values) {
    for (simnet::Model model : models) {
      DiscoveryCell cell;
      cell.n_providers = n;
      cell.model = model;
      std::size_t count = 0;
      for (const auto& run : sweep.runs) {
        if (run.n_providers != n || run.model != model) continue;
        cell.mean_makespan_ms += run.result.makespan_ms;
        cell.mean_cpu_ms += run.result.cpu_ms;
        cell.mean_ram_peak_bytes +=
            static_cast<double>(run.result.ram_bytes_peak);
        cell.mean_messages += static_cast<double>(run.result.messages);
        ++count;
      }
      cell.mean_makespan_ms /= static_cast<double>(count);
      cell.mean_cpu_ms /= static_cast<double>(count);
      cell.mean_ram_peak_bytes /= static_cast<double>(count);
      cell.mean_messages /= static_cast<double>(count);
      sweep.cells.push_back(cell);
    }
  }
  return sweep;
}

ExperimentReport discovery_runs_report(const simnet::SimConfig& base,
                                       const DiscoverySweep& sweep,
                                       const std::vector<std::uint64_t>& seeds) {
  ExperimentReport report;
  report.experiment = "discovery_sweep";
  report.config_echo = simnet::config_echo(base);
  report.seeds = seeds;
  report.columns = {"seed",   "model",    "n_providers", "makespan_ms",
                    "cpu_ms", "ram_peak", "messages",    "discovered",
                    "timed_out"};
  for (const auto& run : sweep.runs) {
    report.rows.push_back(
        {std::to_string(run.seed), simnet::model_name(run.model),
         std::to_string(run.n_providers), fmt(run.result.makespan_ms),
         fmt(run.result.cpu_ms), std::to_string(run.result.ram_bytes_peak),
         std::to_string(run.result.messages),
         std::to_string(run.result.discovered.size()),
         run.result.timed_out ? "1" : "0"});
  }
  return report;
}

// --- prediction curves -------------------------------------------------------

RecordsSource table1_source(std::size_t n_records) {
  RecordsSource source;
  source.generator = data::table1_spec();
  source.n_records = n_records;
  source.label = "table1";
  return source;
}

RecordsSource fixed_source(std::vector<QueryRecord> records, std::string label) {
  RecordsSource source;
  source.n_records = records.size();
  source.fixed = std::move(records);
  source.label = std::move(label);
  return source;
}

std::vector<PredictionCell> exp_prediction_curve(
    const RecordsSource& source, const std::vector<double>& fractions,
    const std::vector<std::uint64_t>& seeds) {
  if (fractions.empty() || seeds.empty())
    throw std::invalid_argument("prediction curve needs fractions and seeds");
  for (double f : fractions)
    if (!(f > 0.0 && f < 1.0))
      throw std::invalid_argument("training fractions must lie in (0,1)");

  // Record sets per seed: generated afresh for a generator source, the
  // fixed set otherwise (accuracy is then seed-independent).
  std::vector<std::vector<QueryRecord>> record_sets(seeds.size());
  parallel_cells(seeds.size(), [&](std::size_t i) {
    record_sets[i] = source.generator
                         ? data::generate_records(*source.generator,
                                                  source.n_records, seeds[i])
                         : source.fixed;
  });

  struct Cell {
    double accuracy = 0.0;
  };
  std::vector<Cell> grid(fractions.size() * seeds.size());
  parallel_cells(grid.size(), [&](std::size_t i) {
    const std::size_t fi = i / seeds.size();
    const std::size_t si = i % seeds.size();
    grid[i].accuracy = predictor::evaluate_accuracy(record_sets[si],
                                                    fractions[fi], seeds[si]);
  });

  std::vector<PredictionCell> cells;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    PredictionCell cell;
    cell.source = source.label;
    cell.n_records = source.n_records;
    cell.fraction = fractions[fi];
    cell.seed_count = seeds.size();
    double sum = 0.0;
    for (std::size_t si = 0; si < seeds.size(); ++si)
      sum += grid[fi * seeds.size() + si].accuracy;
    cell.mean_accuracy = sum / static_cast<double>(seeds.size());
    double var = 0.0;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const double d =
          grid[fi * seeds.size() + si].accuracy - cell.mean_accuracy;
      var += d * d;
    }
    cell.stddev = seeds.size() > 1
                      ? std::sqrt(var / static_cast<double>(seeds.size() - 1))
                      : 0.0;
    cells.push_back(cell);
  }
  return cells;
}

ExperimentReport prediction_report(const std::vector<PredictionCell>& cells,
                                   const std::vector<std::uint64_t>& seeds) {
  ExperimentReport report;
  report.experiment = "prediction_curve";
  report.seeds = seeds;
  if (!cells.empty()) {
    report.config_echo = "source=" + cells.front().source +
                         ";n_records=" + std::to_string(cells.front().n_records);
  }
  report.columns = {"source",        "n_records", "fraction",
                    "mean_accuracy", "stddev",    "seeds"};
  for (const auto& cell : cells)
    report.rows.push_back({cell.source, std::to_string(cell.n_records),
                           fmt(cell.fraction), fmt(cell.mean_accuracy),
                           fmt(cell.stddev), std::to_string(cell.seed_count)});
  return report;
}

// --- trust comparison ---------------------------------------------------------

double TrustSchemeRow::accuracy() const {
  return comparable > 0
             ? static_cast<double>(hits) / static_cast<double>(comparable)
             : 0.0;
}

double TrustSchemeRow::cpi_value() const {
  if (!available || mean_transactions < 1.0) return 0.0;
  return trust::cpi(accuracy(), mean_transactions);
}

namespace {

struct SchemeAccumulator {
  std::size_t comparable = 0;
  std::size_t hits = 0;
  std::int64_t transactions = 0;
  std::size_t violations = 0;

  void add(const trust::TrustVerdict& verdict, RatingLevel ground,
           std::int64_t expected_transactions) {
    ++comparable;
    if (nearest_rating(verdict.score) == ground) ++hits;
    transactions += verdict.transactions;
    if (verdict.transactions != expected_transactions) ++violations;
  }
};

// Copy of the requester's ledger with every trace of the target provider
// removed: the rating under prediction must not inform the prediction.
trust::ReputationData withhold_target(const trust::ReputationData& rd,
                                      const PeerId& target) {
  trust::ReputationData out;
  out.owner = rd.owner;
  for (const auto& pr : rd.spr)
    if (pr.provider != target) out.spr.push_back(pr);
  for (const auto& record : rd.ir)
    if (record.provider != target) out.ir.push_back(record);
  out.rr = rd.rr;
  return out;
}

}  // namespace

TrustComparison exp_trust_comparison(const data::TrustGraph& graph,
                                     const std::vector<trust::Scheme>& schemes,
                                     std::size_t min_ratings) {
  const auto filtered = data::filter_min_ratings(graph, min_ratings);
  if (filtered.edges.empty())
    throw std::runtime_error("trust graph empty after min-rating filter");

  const SemanticType stype{"Media"};
  const auto assignment = data::uniform_assignment(filtered, stype);
  const auto rds = data::trust_graph_to_rds(filtered, assignment);
  const auto friend_map = data::classify_friends(filtered);

  std::map<std::pair<PeerId, PeerId>, RatingLevel> edge_level;
  for (const auto& e : filtered.edges) edge_level[{e.rater, e.ratee}] = e.level;

  // FOAF RDs per friend, materialised once.
  std::map<PeerId, std::vector<trust::ReputationData>> foaf_cache;
  const auto foaf_rds_of = [&](const PeerId& fid)
      -> const std::vector<trust::ReputationData>& {
    auto it = foaf_cache.find(fid);
    if (it != foaf_cache.end()) return it->second;
    std::vector<trust::ReputationData> out;
    const auto fit = friend_map.find(fid);
    if (fit != friend_map.end())
      for (const auto& ff : fit->second.friends) out.push_back(rds.at(ff));
    return foaf_cache.emplace(fid, std::move(out)).first->second;
  };
  const trust::FoafFetcher fetcher = [&](const PeerId& fid) {
    return foaf_rds_of(fid);
  };

  std::map<trust::Scheme, SchemeAccumulator> acc;
  for (auto scheme : schemes) acc[scheme];

  TrustComparison comparison;
  for (const auto& [requester, sets] : friend_map) {
    if (sets.non_friends.empty()) continue;
    ++comparison.requesters;

    std::vector<trust::ReputationData> friends_rd;
    friends_rd.reserve(sets.friends.size());
    for (const auto& f : sets.friends) friends_rd.push_back(rds.at(f));

    // Expected transaction counts, recomputed independently of the
    // scheme implementations: AFOAF fetches every friend's friends,
    // HEFHEF only the stype-experience argmax friend's friends.
    std::int64_t afoaf_expected = 0;
    for (const auto& f : sets.friends)
      afoaf_expected +=
          static_cast<std::int64_t>(friend_map.at(f).friends.size());
    std::int64_t hefhef_expected = 0;
    if (!friends_rd.empty()) {
      const trust::ReputationData* hef = nullptr;
      std::int64_t best = -1;
      for (const auto& rd : friends_rd) {
        const std::int64_t experience = trust::stype_experience(rd, stype);
        if (experience > best || (experience == best && rd.owner < hef->owner)) {
          hef = &rd;
          best = experience;
        }
      }
      hefhef_expected =
          static_cast<std::int64_t>(friend_map.at(hef->owner).friends.size());
    }

    for (const auto& target : sets.non_friends) {
      ++comparison.pairs;
      const RatingLevel ground = edge_level.at({requester, target});
      const std::string sname = assignment.at(target).sname;
      const auto requester_view = withhold_target(rds.at(requester), target);

      std::vector<trust::ReputationData> proximal;
      proximal.reserve(sets.non_friends.size());
      for (const auto& p : sets.non_friends)
        if (p != target) proximal.push_back(rds.at(p));
      const auto expected_public =
          static_cast<std::int64_t>(proximal.size());

      for (auto scheme : schemes) {
        auto& a = acc[scheme];
        try {
          switch (scheme) {
            case trust::Scheme::AF:
              a.add(trust::trust_af(target, sname, friends_rd), ground,
                    static_cast<std::int64_t>(friends_rd.size()));
              break;
            case trust::Scheme::AFOAF:
              a.add(trust::trust_afoaf(requester, target, sname, friends_rd,
                                       fetcher),
                    ground, afoaf_expected);
              break;
            case trust::Scheme::HEF: {
              auto verdict = trust::trust_hef(&requester_view, target, sname,
                                              stype, friends_rd);
              if (!verdict) break;
              a.add(*verdict, ground, 1);
              break;
            }
            case trust::Scheme::HEFHEF: {
              auto verdict = trust::trust_hefhef(requester, target, sname,
                                                 stype, friends_rd, fetcher);
              if (!verdict) break;
              a.add(*verdict, ground, hefhef_expected);
              break;
            }
            case trust::Scheme::MSF:
              a.add(trust::trust_msf(requester_view, target, sname, friends_rd),
                    ground, 1);
              break;
            case trust::Scheme::PublicNaive:
              a.add(trust::trust_public(requester, target, sname, stype,
                                        proximal, trust::PublicScheme::Naive),
                    ground, expected_public);
              break;
            case trust::Scheme::PublicExpOnly:
              a.add(trust::trust_public(requester, target, sname, stype,
                                        proximal, trust::PublicScheme::ExpOnly),
                    ground, expected_public);
              break;
            case trust::Scheme::PublicCreditOnly:
              a.add(trust::trust_public(requester, target, sname, stype,
                                        proximal,
                                        trust::PublicScheme::CreditOnly),
                    ground, expected_public);
              break;
            case trust::Scheme::PublicProposed:
              a.add(trust::trust_public(requester, target, sname, stype,
                                        proximal,
                                        trust::PublicScheme::Proposed),
                    ground, expected_public);
              break;
          }
        } catch (const std::runtime_error&) {
          // Pair lacks this scheme's prerequisites; excluded from its
          // comparable count.
        }
      }
    }
  }

  for (auto scheme : schemes) {
    const auto& a = acc.at(scheme);
    TrustSchemeRow row;
    row.scheme = scheme;
    row.comparable = a.comparable;
    row.hits = a.hits;
    row.available = a.comparable > 0;
    row.mean_transactions =
        a.comparable > 0 ? static_cast<double>(a.transactions) /
                               static_cast<double>(a.comparable)
                         : 0.0;
    comparison.rows.push_back(row);
    comparison.invariant_violations += a.violations;
  }
  return comparison;
}

ExperimentReport trust_report(const TrustComparison& comparison,
                              const std::string& source_label) {
  ExperimentReport report;
  report.experiment = "trust_comparison";
  report.config_echo = "source=" + source_label +
                       ";requesters=" + std::to_string(comparison.requesters) +
                       ";pairs=" + std::to_string(comparison.pairs);
  report.columns = {"scheme",            "comparable", "accuracy",
                    "mean_transactions", "cpi",        "available"};
  for (const auto& row : comparison.rows) {
    report.rows.push_back(
        {trust::scheme_name(row.scheme), std::to_string(row.comparable),
         row.available ? fmt(row.accuracy()) : "n/a",
         row.available ? fmt(row.mean_transactions) : "n/a",
         row.available ? fmt(row.cpi_value()) : "n/a",
         row.available ? "1" : "0"});
  }
  return report;
}

}  // namespace msnp::harness
