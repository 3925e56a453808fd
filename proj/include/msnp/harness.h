#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msnp/data.h"
#include "msnp/domain.h"
#include "msnp/predictor.h"
#include "msnp/simnet.h"
#include "msnp/trust.h"

namespace msnp::harness {

// Tabular experiment output: pre-formatted cells so that serialisation
// is byte-reproducible.
struct ExperimentReport {
  std::string experiment;
  std::string config_echo;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const ExperimentReport& report, const std::string& path);
void write_json(const ExperimentReport& report, const std::string& path);

std::string fmt(double value);  // fixed 6-decimal formatting

// --- discovery makespan sweep ------------------------------------------

struct DiscoveryRun {
  std::size_t n_providers = 0;
  simnet::Model model = simnet::Model::Pull;
  std::uint64_t seed = 0;
  simnet::SimResult result;
};

struct DiscoveryCell {
  std::size_t n_providers = 0;
  simnet::Model model = simnet::Model::Pull;
  double mean_makespan_ms = 0.0;
  double mean_cpu_ms = 0.0;
  double mean_ram_peak_bytes = 0.0;
  double mean_messages = 0.0;
};

struct DiscoverySweep {
  std::vector<DiscoveryRun> runs;    // one per (n, model, seed)
  std::vector<DiscoveryCell> cells;  // seed means per (n, model)
};

DiscoverySweep exp_discovery_sweep(const simnet::SimConfig& base,
                                   const std::vector<std::size_t>& n_values,
                                   const std::vector<simnet::Model>& models,
                                   const std::vector<std::uint64_t>& seeds,
                                   double hybrid_fraction = 0.5);

ExperimentReport discovery_runs_report(const simnet::SimConfig& base,
                                       const DiscoverySweep& sweep,
                                       const std::vector<std::uint64_t>& seeds);

// --- prediction accuracy curves ------------------------------------------

// Either a generator (fresh records per seed) or a fixed record set.
struct RecordsSource {
  std::optional<data::GeneratorSpec> generator;
  std::size_t n_records = 0;
  std::vector<QueryRecord> fixed;
  std::string label;
};

RecordsSource table1_source(std::size_t n_records);
RecordsSource fixed_source(std::vector<QueryRecord> records, std::string label);

struct PredictionCell {
  std::string source;
  std::size_t n_records = 0;
  double fraction = 0.0;
  double mean_accuracy = 0.0;
  double stddev = 0.0;
  std::size_t seed_count = 0;
};

std::vector<PredictionCell> exp_prediction_curve(
    const RecordsSource& source, const std::vector<double>& fractions,
    const std::vector<std::uint64_t>& seeds);

ExperimentReport prediction_report(const std::vector<PredictionCell>& cells,
                                   const std::vector<std::uint64_t>& seeds);

// --- trust scheme comparison ----------------------------------------------

struct TrustSchemeRow {
  trust::Scheme scheme = trust::Scheme::AF;
  std::size_t comparable = 0;      // pairs the scheme could evaluate
  std::size_t hits = 0;            // exact rating-level matches
  double mean_transactions = 0.0;
  bool available = false;          // false when no pair was comparable
  double accuracy() const;
  double cpi_value() const;        // accuracy per transaction
};

struct TrustComparison {
  std::vector<TrustSchemeRow> rows;
  std::size_t requesters = 0;
  std::size_t pairs = 0;  // (requester, non-friend ratee) pairs examined
  // Transaction-accounting violations; must stay zero.
  std::size_t invariant_violations = 0;
};

// For every requester and every non-friend ratee with a recorded rating,
// predicts the rating level under each scheme, skipping pairs lacking
// that scheme's prerequisites. The requester's rating of the target is
// withheld from its own ledger during the evaluation.
TrustComparison exp_trust_comparison(const data::TrustGraph& graph,
                                     const std::vector<trust::Scheme>& schemes,
                                     std::size_t min_ratings = 10);

ExperimentReport trust_report(const TrustComparison& comparison,
                              const std::string& source_label);

// --- CLI -------------------------------------------------------------------

// Subcommands: discover, predict, trust, gen. Exit codes: 0 success,
// 1 usage error, 2 data error.
int cli_main(const std::vector<std::string>& args);

}  // namespace msnp::harness
