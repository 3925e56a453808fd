#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msnp/harness.h"

namespace msnp::harness {

namespace {

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = base + i;
  return seeds;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : csv) {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item.push_back(ch);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

int run_discover(const std::string& n_csv, const std::string& models_csv,
                 std::size_t seed_count, std::uint64_t seed_base,
                 const std::string& config_path, double hybrid_fraction,
                 const std::string& out_path) {
  simnet::SimConfig base;
  if (!config_path.empty()) base = simnet::load_config(config_path);
  std::vector<std::size_t> n_values;
  for (const auto& n : split_list(n_csv))
    n_values.push_back(static_cast<std::size_t>(std::stoull(n)));
  std::vector<simnet::Model> models;
  for (const auto& name : split_list(models_csv))
    models.push_back(simnet::model_from_name(name));
  const auto seeds = seed_list(seed_base, seed_count);

  const auto sweep =
      exp_discovery_sweep(base, n_values, models, seeds, hybrid_fraction);
  write_csv(discovery_runs_report(base, sweep, seeds), out_path);
  std::printf("wrote %zu runs to %s\n", sweep.runs.size(), out_path.c_str());
  return 0;
}

int run_predict(bool table1, std::size_t n_records,
                const std::string& records_path,
                const std::string& sequence_path,
                const std::string& fractions_csv, std::size_t seed_count,
                std::uint64_t seed_base, const std::string& out_path) {
  RecordsSource source;
  if (table1) {
    source = table1_source(n_records);
  } else if (!records_path.empty()) {
    source = fixed_source(data::load_records_csv(records_path), records_path);
  } else {
    source = fixed_source(data::load_sequence_dataset(sequence_path),
                          sequence_path);
  }
  std::vector<double> fractions;
  for (const auto& f : split_list(fractions_csv))
    fractions.push_back(std::stod(f));
  const auto seeds = seed_list(seed_base, seed_count);

  const auto cells = exp_prediction_curve(source, fractions, seeds);
  write_csv(prediction_report(cells, seeds), out_path);
  std::printf("wrote %zu cells to %s\n", cells.size(), out_path.c_str());
  return 0;
}

int run_trust(const std::string& graph_path, bool planted,
              std::uint64_t planted_seed, const std::string& schemes_csv,
              std::size_t min_ratings, const std::string& out_path) {
  data::TrustGraph graph;
  std::string label;
  if (planted) {
    data::PlantedGraphConfig config;
    config.seed = planted_seed;
    graph = data::generate_planted_graph(config);
    label = "planted:" + std::to_string(planted_seed);
  } else {
    graph = data::load_trust_graph(graph_path);
    label = graph_path;
  }
  std::vector<trust::Scheme> schemes;
  for (const auto& name : split_list(schemes_csv)) {
    bool known = false;
    for (auto scheme :
         {trust::Scheme::AF, trust::Scheme::AFOAF, trust::Scheme::HEF,
          trust::Scheme::HEFHEF, trust::Scheme::MSF, trust::Scheme::PublicNaive,
          trust::Scheme::PublicExpOnly, trust::Scheme::PublicCreditOnly,
          trust::Scheme::PublicProposed}) {
      if (name == trust::scheme_name(scheme)) {
        schemes.push_back(scheme);
        known = true;
        break;
      }
    }
    if (!known) throw CLI::ValidationError("--schemes", "unknown scheme: " + name);
  }

  const auto comparison = exp_trust_comparison(graph, schemes, min_ratings);
  write_json(trust_report(comparison, label), out_path);
  std::printf("wrote %zu scheme rows to %s\n", comparison.rows.size(),
              out_path.c_str());
  if (comparison.invariant_violations > 0) {
    std::fprintf(stderr, "error: %zu transaction-invariant violations\n",
                 comparison.invariant_violations);
    return 2;
  }
  return 0;
}

int run_gen(bool table1, bool planted, std::size_t n_records,
            std::uint64_t seed, const std::string& out_path) {
  if (table1) {
    const auto records =
        data::generate_records(data::table1_spec(), n_records, seed);
    data::save_records_csv(records, out_path);
    std::printf("wrote %zu records to %s\n", records.size(), out_path.c_str());
  } else if (planted) {
    data::PlantedGraphConfig config;
    config.seed = seed;
    const auto graph = data::generate_planted_graph(config);
    data::save_trust_graph(graph, out_path);
    std::printf("wrote %zu edges to %s\n", graph.edges.size(), out_path.c_str());
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Proximity service-discovery simulation and trust toolkit"};
  app.require_subcommand(1);

  // discover
  auto* discover = app.add_subcommand(
      "discover", "Run the discovery-model makespan sweep");
  std::string n_csv = "50,100,200,300,400,500";
  std::string models_csv = "pull,push,prefpush";
  std::size_t seed_count = 10;
  std::uint64_t seed_base = 0;
  std::string config_path;
  double hybrid_fraction = 0.5;
  std::string discover_out;
  discover->add_option("--n", n_csv, "Provider counts, comma separated");
  discover->add_option("--models", models_csv,
                       "Models: pull,push,prefpush,hybrid");
  discover->add_option("--seeds", seed_count, "Number of seeds");
  discover->add_option("--seed-base", seed_base, "First seed value");
  discover->add_option("--config", config_path, "Sim config file");
  discover->add_option("--hybrid-fraction", hybrid_fraction,
                       "PrefPush support share in the hybrid model");
  discover->add_option("--out", discover_out, "Output CSV")->required();

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Run the prediction-accuracy curve");
  bool table1 = false;
  std::size_t n_records = 100;
  std::string records_path, sequence_path;
  std::string fractions_csv = "0.6,0.7,0.8,0.9";
  std::size_t predict_seed_count = 20;
  std::uint64_t predict_seed_base = 1;
  std::string predict_out;
  auto* table1_flag =
      predict->add_flag("--table1", table1, "Use the synthetic generator");
  predict->add_option("--n", n_records, "Record count for --table1");
  auto* records_opt =
      predict->add_option("--records", records_path, "Records CSV");
  auto* sequence_opt = predict->add_option("--sequence", sequence_path,
                                           "Sequence dataset CSV");
  records_opt->excludes(table1_flag)->excludes(sequence_opt);
  sequence_opt->excludes(table1_flag);
  predict->add_option("--fractions", fractions_csv,
                      "Training fractions, comma separated");
  predict->add_option("--seeds", predict_seed_count, "Number of seeds");
  predict->add_option("--seed-base", predict_seed_base, "First seed value");
  predict->add_option("--out", predict_out, "Output CSV")->required();

  // trust
  auto* trust_cmd = app.add_subcommand(
      "trust", "Run the trust scheme comparison");
  std::string graph_path;
  bool trust_planted = false;
  std::uint64_t trust_seed = 1;
  std::string schemes_csv =
      "af,afoaf,hef,hefhef,msf,naive,exponly,creditonly,proposed";
  std::size_t min_ratings = 10;
  std::string trust_out;
  auto* graph_opt =
      trust_cmd->add_option("--graph", graph_path, "Trust graph file");
  auto* planted_flag = trust_cmd->add_flag("--planted", trust_planted,
                                           "Use a seeded planted graph");
  graph_opt->excludes(planted_flag);
  trust_cmd->add_option("--seed", trust_seed, "Planted graph seed");
  trust_cmd->add_option("--schemes", schemes_csv, "Schemes, comma separated");
  trust_cmd->add_option("--min-ratings", min_ratings,
                        "Drop raters with fewer ratings");
  trust_cmd->add_option("--out", trust_out, "Output JSON")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "Emit synthetic datasets");
  bool gen_table1 = false, gen_planted = false;
  std::size_t gen_n = 100;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen_t1 = gen->add_flag("--table1", gen_table1, "Emit generator records");
  auto* gen_pl = gen->add_flag("--planted", gen_planted, "Emit a planted graph");
  gen_t1->excludes(gen_pl);
  gen->add_option("--n", gen_n, "Record count for --table1");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output path")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (discover->parsed())
      return run_discover(n_csv, models_csv, seed_count, seed_base, config_path,
                          hybrid_fraction, discover_out);
    if (predict->parsed()) {
      if (!table1 && records_path.empty() && sequence_path.empty()) {
        std::fprintf(stderr,
                     "predict needs --table1, --records or --sequence\n");
        return 1;
      }
      return run_predict(table1, n_records, records_path, sequence_path,
                         fractions_csv, predict_seed_count, predict_seed_base,
                         predict_out);
    }
    if (trust_cmd->parsed()) {
      if (!trust_planted && graph_path.empty()) {
        std::fprintf(stderr, "trust needs --graph or --planted\n");
        return 1;
      }
      return run_trust(graph_path, trust_planted, trust_seed, schemes_csv,
                       min_ratings, trust_out);
    }
    if (gen->parsed()) {
      if (!gen_table1 && !gen_planted) {
        std::fprintf(stderr, "gen needs --table1 or --planted\n");
        return 1;
      }
      return run_gen(gen_table1, gen_planted, gen_n, gen_seed, gen_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace msnp::harness
