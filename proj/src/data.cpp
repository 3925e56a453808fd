#include "msnp/data.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace msnp::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

std::optional<RatingLevel> parse_level(const std::string& token) {
  if (auto level = rating_from_word(token)) return level;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() && *end == '\0')
    if (auto level = rating_from_value(value)) return level;
  return std::nullopt;
}

}  // namespace

std::vector<PeerId> TrustGraph::peers() const {
  std::set<PeerId> ids;
  for (const auto& e : edges) {
    ids.insert(e.rater);
    ids.insert(e.ratee);
  }
  return {ids.begin(), ids.end()};
}

std::map<PeerId, std::size_t> TrustGraph::out_degrees() const {
  std::map<PeerId, std::size_t> out;
  for (const auto& e : edges) ++out[e.rater];
  return out;
}

TrustGraph load_trust_graph(const std::string& path, GraphLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trust graph file: " + path);

  GraphLoadStats local;
  TrustGraph g;
  std::map<std::pair<PeerId, PeerId>, std::size_t> index;  // pair -> edge slot
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string rater, ratee, level_token, extra;
    fields >> rater >> ratee >> level_token;
    const bool has_extra = static_cast<bool>(fields >> extra);
    std::optional<RatingLevel> level;
    if (!level_token.empty()) level = parse_level(level_token);
    if (rater.empty() || ratee.empty() || !level.has_value() || has_extra ||
        rater == ratee) {
      ++local.malformed_lines;
      continue;
    }
    const RatingLevel parsed = *level;
    const auto key = std::make_pair(rater, ratee);
    if (auto it = index.find(key); it != index.end()) {
      ++local.duplicate_edges;
      std::fprintf(stderr,
                   "warning: %s:%zu duplicate edge %s -> %s, last one wins\n",
                   path.c_str(), line_no, rater.c_str(), ratee.c_str());
      g.edges[it->second].level = parsed;
    } else {
      index.emplace(key, g.edges.size());
      g.edges.push_back({rater, ratee, parsed});
    }
  }
  if (local.malformed_lines > 0)
    std::fprintf(stderr, "warning: %s: skipped %zu malformed line(s)\n",
                 path.c_str(), local.malformed_lines);
  if (stats) *stats = local;
  if (g.edges.empty())
    throw DataError("trust graph file holds no valid edge: " + path);
  return g;
}

void save_trust_graph(const TrustGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trust graph file: " + path);
  for (const auto& e : g.edges)
    out << e.rater << ' ' << e.ratee << ' ' << rating_name(e.level) << '\n';
}

TrustGraph filter_min_ratings(const TrustGraph& g, std::size_t min_ratings) {
  const auto degrees = g.out_degrees();
  TrustGraph out;
  for (const auto& e : g.edges)
    if (degrees.at(e.rater) >= min_ratings) out.edges.push_back(e);
  return out;
}

std::map<PeerId, FriendSets> classify_friends(const TrustGraph& g) {
  std::map<std::pair<PeerId, PeerId>, RatingLevel> levels;
  for (const auto& e : g.edges) levels[{e.rater, e.ratee}] = e.level;

  std::map<PeerId, FriendSets> out;
  for (const auto& id : g.peers()) out[id];
  for (const auto& e : g.edges) {
    const auto back = levels.find({e.ratee, e.rater});
    const bool mutual_master = e.level == RatingLevel::Master &&
                               back != levels.end() &&
                               back->second == RatingLevel::Master;
    if (mutual_master)
      out[e.rater].friends.insert(e.ratee);
    else
      out[e.rater].non_friends.insert(e.ratee);
  }
  return out;
}

StypeAssignment uniform_assignment(const TrustGraph& g,
                                   const SemanticType& stype) {
  StypeAssignment out;
  for (const auto& id : g.peers()) out[id] = {"svc:" + id, stype};
  return out;
}

std::map<PeerId, trust::ReputationData> trust_graph_to_rds(
    const TrustGraph& g, const StypeAssignment& assignment) {
  for (const auto& e : g.edges)
    if (!assignment.contains(e.ratee))
      throw std::invalid_argument("no service assignment for ratee " + e.ratee);

  std::map<PeerId, trust::ReputationData> rds;
  for (const auto& id : g.peers()) rds[id].owner = id;

  // Stypes for which each peer holds at least one Master-level rating.
  std::map<PeerId, std::set<std::string>> master_stypes;
  std::int64_t timestamp = 0;
  for (const auto& e : g.edges) {
    const auto& svc = assignment.at(e.ratee);
    auto& rd = rds[e.rater];
    rd.spr.push_back({e.ratee, {{svc.sname, svc.stype, e.level}}});
    rd.ir.push_back({e.ratee, svc.sname, svc.stype, timestamp++});
    if (e.level == RatingLevel::Master)
      master_stypes[e.rater].insert(svc.stype.name);
  }

  const auto friend_map = classify_friends(g);
  std::set<std::string> all_stypes;
  for (const auto& [id, svc] : assignment) all_stypes.insert(svc.stype.name);
  for (auto& [id, rd] : rds) {
    const auto& friends = friend_map.at(id).friends;
    for (const auto& stype : all_stypes) {
      std::set<PeerId> ids;
      for (const auto& f : friends) {
        const auto it = master_stypes.find(f);
        if (it != master_stypes.end() && it->second.contains(stype))
          ids.insert(f);
      }
      if (!ids.empty()) rd.rr.push_back({SemanticType{stype}, std::move(ids)});
    }
  }
  return rds;
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.rows.empty()) throw std::invalid_argument("generator spec has no rows");
  std::set<std::string> dims;
  for (const auto& d : spec.rows.front().dims) dims.insert(d.ctype);
  for (const auto& row : spec.rows) {
    if (row.qid.empty()) throw std::invalid_argument("generator row without qid");
    std::set<std::string> row_dims;
    for (const auto& d : row.dims) {
      if (d.values.empty())
        throw std::invalid_argument("generator dimension '" + d.ctype +
                                    "' has no values");
      row_dims.insert(d.ctype);
    }
    if (row_dims != dims)
      throw std::invalid_argument("generator row '" + row.qid +
                                  "' does not name all dimensions");
  }
}

namespace {

std::vector<std::string> value_range(const std::string& prefix, int lo, int hi) {
  std::vector<std::string> out;
  for (int i = lo; i <= hi; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

GeneratorSpec table1_spec() {
  GeneratorSpec spec;
  const auto fixed = [](const std::string& v) {
    return std::vector<std::string>{v};
  };
  spec.rows.push_back({"Q1",
                       {{"CL", fixed("L1")},
                        {"CT", fixed("T1")},
                        {"CA", value_range("A", 1, 5)},
                        {"CW", value_range("W", 1, 5)},
                        {"CP", value_range("P", 1, 5)}}});
  spec.rows.push_back({"Q2",
                       {{"CL", value_range("L", 1, 5)},
                        {"CT", fixed("T2")},
                        {"CA", fixed("A2")},
                        {"CW", value_range("W", 1, 5)},
                        {"CP", value_range("P", 1, 5)}}});
  spec.rows.push_back({"Q3",
                       {{"CL", value_range("L", 1, 5)},
                        {"CT", value_range("T", 1, 5)},
                        {"CA", fixed("A3")},
                        {"CW", fixed("W3")},
                        {"CP", value_range("P", 1, 5)}}});
  spec.rows.push_back({"Q4",
                       {{"CL", value_range("L", 1, 5)},
                        {"CT", value_range("T", 1, 5)},
                        {"CA", value_range("A", 1, 5)},
                        {"CW", fixed("W4")},
                        {"CP", fixed("P4")}}});
  spec.rows.push_back({"Q5",
                       {{"CL", fixed("L5")},
                        {"CT", value_range("T", 1, 5)},
                        {"CA", value_range("A", 1, 5)},
                        {"CW", value_range("W", 1, 5)},
                        {"CP", fixed("P5")}}});
  return spec;
}

std::vector<QueryRecord> generate_records(const GeneratorSpec& spec,
                                          std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("record count must be >= 1");
  validate_spec(spec);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> row_dist(0, spec.rows.size() - 1);

  std::vector<QueryRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = spec.rows[row_dist(rng)];
    QueryRecord record;
    record.query = Query{row.qid, SemanticType{row.qid}, {}};
    for (const auto& dim : row.dims) {
      std::size_t pick = 0;
      if (dim.values.size() > 1) {
        std::uniform_int_distribution<std::size_t> dist(0, dim.values.size() - 1);
        pick = dist(rng);
      }
      record.contexts.push_back({dim.ctype, dim.values[pick]});
    }
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<QueryRecord> load_sequence_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sequence dataset: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw DataError("sequence dataset is empty: " + path);
  const auto columns = split(trim(header), ',');
  const auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (trim(columns[i]) == name) return i;
    throw DataError("sequence dataset missing column '" + name + "': " + path);
  };
  const std::size_t loc = column_index("location");
  const std::size_t act = column_index("action");
  const std::size_t obj = column_index("object");

  std::vector<QueryRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() <= std::max({loc, act, obj}))
      throw DataError("sequence dataset row with too few fields: " + line);
    QueryRecord record;
    const std::string object = trim(fields[obj]);
    record.query = Query{object, SemanticType{object}, {}};
    record.contexts.push_back({"location", trim(fields[loc])});
    record.contexts.push_back({"action", trim(fields[act])});
    validate_record(record);
    out.push_back(std::move(record));
  }
  if (out.empty()) throw DataError("sequence dataset has no rows: " + path);
  return out;
}

std::vector<QueryRecord> load_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open records file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("records file is empty: " + path);
  std::vector<QueryRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    QueryRecord record;
    const std::string qid = trim(line.substr(0, comma == std::string::npos
                                                    ? line.size()
                                                    : comma));
    if (qid.empty()) throw DataError("records row without qid: " + line);
    record.query = Query{qid, SemanticType{qid}, {}};
    if (comma != std::string::npos) {
      for (const auto& pair : split(line.substr(comma + 1), ';')) {
        if (trim(pair).empty()) continue;
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
          throw DataError("records row with malformed context '" + pair +
                          "': " + line);
        record.contexts.push_back({trim(pair.substr(0, eq)),
                                   trim(pair.substr(eq + 1))});
      }
    }
    validate_record(record);
    out.push_back(std::move(record));
  }
  return out;
}

void save_records_csv(const std::vector<QueryRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write records file: " + path);
  out << "qid,contexts\n";
  for (const auto& record : records) {
    out << record.query.qid << ',';
    for (std::size_t i = 0; i < record.contexts.size(); ++i) {
      if (i > 0) out << ';';
      out << record.contexts[i].ctype << '=' << record.contexts[i].value;
    }
    out << '\n';
  }
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rules file: " + path);
  RuleSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("rules line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "importance") {
      const auto parts = split(value, ',');
      ImportanceRule rule;
      char* end = nullptr;
      if (parts.size() == 2) {
        rule.ctype = trim(parts[0]);
        rule.weight = std::strtod(trim(parts[1]).c_str(), &end);
      } else if (parts.size() == 3) {
        rule.ctype = trim(parts[0]);
        rule.qid = trim(parts[1]);
        rule.weight = std::strtod(trim(parts[2]).c_str(), &end);
      } else {
        throw DataError("malformed importance rule: " + value);
      }
      if (rule.weight < 0)
        throw DataError("importance weight must be >= 0: " + value);
      out.importance.push_back(std::move(rule));
    } else if (key == "filter") {
      const auto colon = value.find(':');
      if (colon == std::string::npos)
        throw DataError("malformed filter rule: " + value);
      FilterRule rule;
      rule.qid = trim(value.substr(0, colon));
      for (const auto& ctype : split(value.substr(colon + 1), ';'))
        if (!trim(ctype).empty()) rule.ignored_ctypes.insert(trim(ctype));
      if (rule.qid.empty() || rule.ignored_ctypes.empty())
        throw DataError("malformed filter rule: " + value);
      out.filters.push_back(std::move(rule));
    } else {
      throw DataError("unknown rule kind '" + key + "'");
    }
  }
  return out;
}

namespace {

PeerId numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
  return buf;
}

// k distinct indices from [0, n) by partial Fisher-Yates.
std::vector<std::size_t> pick_distinct(std::size_t n, std::size_t k,
                                       std::mt19937_64& rng) {
  if (k > n)
    throw std::invalid_argument("planted graph: sample larger than population");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, n - 1);
    std::swap(pool[i], pool[dist(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

TrustGraph generate_planted_graph(const PlantedGraphConfig& config) {
  if (config.providers == 0 || config.experts == 0 || config.hubs == 0 ||
      config.requesters == 0)
    throw std::invalid_argument("planted graph needs every role populated");
  if (config.provider_rates > config.noisy ||
      config.friends_per_requester > config.friend_raters)
    throw std::invalid_argument("planted graph: inconsistent role sizes");
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> level_dist(0, 2);
  const auto random_level = [&] {
    return static_cast<RatingLevel>(level_dist(rng));
  };

  // True quality per provider; everyone else's quality is fixed by role
  // so that every honest rating is consistent.
  std::vector<RatingLevel> quality(config.providers);
  for (auto& q : quality) q = random_level();

  std::vector<PeerId> providers, experts, hubs, noisy, friends, requesters;
  for (std::size_t i = 0; i < config.providers; ++i)
    providers.push_back(numbered("prov", i));
  for (std::size_t i = 0; i < config.experts; ++i)
    experts.push_back(numbered("exp", i));
  for (std::size_t i = 0; i < config.hubs; ++i)
    hubs.push_back(numbered("hub", i));
  for (std::size_t i = 0; i < config.noisy; ++i)
    noisy.push_back(numbered("nzy", i));
  for (std::size_t i = 0; i < config.friend_raters; ++i)
    friends.push_back(numbered("frd", i));
  for (std::size_t i = 0; i < config.requesters; ++i)
    requesters.push_back(numbered("req", i));

  TrustGraph g;
  const auto add = [&](const PeerId& rater, const PeerId& ratee,
                       RatingLevel level) {
    g.edges.push_back({rater, ratee, level});
  };

  // Experts rate many providers truthfully and befriend two hubs each.
  for (std::size_t e = 0; e < config.experts; ++e) {
    for (std::size_t p : pick_distinct(config.providers, config.expert_rates, rng))
      add(experts[e], providers[p], quality[p]);
    for (std::size_t j = 0; j < std::min<std::size_t>(2, config.hubs); ++j) {
      const std::size_t h = (2 * e + j) % config.hubs;
      add(experts[e], hubs[h], RatingLevel::Master);
      add(hubs[h], experts[e], RatingLevel::Master);
    }
  }
  // Hubs also rate a few providers truthfully.
  for (std::size_t h = 0; h < config.hubs; ++h)
    for (std::size_t p : pick_distinct(config.providers, config.hub_rates, rng))
      add(hubs[h], providers[p], quality[p]);
  // Noisy raters rate uniformly at random.
  for (std::size_t x = 0; x < config.noisy; ++x)
    for (std::size_t p : pick_distinct(config.providers, config.noisy_rates, rng))
      add(noisy[x], providers[p], random_level());
  // Providers meet their own rating quota against noisy raters, keeping
  // provider reputations exclusively in the hands of the rater roles.
  for (std::size_t p = 0; p < config.providers; ++p)
    for (std::size_t k = 0; k < config.provider_rates; ++k)
      add(providers[p], noisy[(p + k) % config.noisy], RatingLevel::Journeyer);
  // Friend raters rate a few providers truthfully; their requester
  // friendships follow below.
  for (std::size_t f = 0; f < config.friend_raters; ++f)
    for (std::size_t p : pick_distinct(config.providers, config.friend_rates, rng))
      add(friends[f], providers[p], quality[p]);

  for (std::size_t r = 0; r < config.requesters; ++r) {
    for (std::size_t p :
         pick_distinct(config.providers, config.targets_per_requester, rng))
      add(requesters[r], providers[p], quality[p]);
    for (std::size_t e :
         pick_distinct(config.experts, config.experts_per_requester, rng))
      add(requesters[r], experts[e], RatingLevel::Master);
    for (std::size_t h : pick_distinct(config.hubs, config.hubs_per_requester, rng))
      add(requesters[r], hubs[h], RatingLevel::Master);
    for (std::size_t x : pick_distinct(config.noisy, config.noisy_per_requester, rng))
      add(requesters[r], noisy[x], RatingLevel::Journeyer);
    for (std::size_t j = 0; j < config.friends_per_requester; ++j) {
      const std::size_t f =
          (r * config.friends_per_requester + j) % config.friend_raters;
      add(requesters[r], friends[f], RatingLevel::Master);
      add(friends[f], requesters[r], RatingLevel::Master);
    }
  }
  return g;
}

}  // namespace msnp::data
