#include "msnp/domain.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace msnp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Ontology Ontology::from_entries(
    const std::vector<std::pair<std::string, std::string>>& child_parent) {
  Ontology o;
  for (const auto& [child, parent] : child_parent) {
    if (child.empty()) throw DataError("ontology: empty concept name");
    if (!o.parent_.emplace(child, parent).second)
      throw DataError("ontology: duplicate concept '" + child + "'");
  }
  for (const auto& [child, parent] : o.parent_) {
    if (parent.empty()) {
      if (!o.root_.empty())
        throw DataError("ontology: multiple roots ('" + o.root_ + "', '" +
                        child + "')");
      o.root_ = child;
    } else if (!o.parent_.contains(parent)) {
      throw DataError("ontology: dangling parent '" + parent + "' of '" +
                      child + "'");
    }
  }
  if (o.root_.empty() && !o.parent_.empty())
    throw DataError("ontology: no root concept");
  // Every node must reach the root; a walk longer than the node count
  // means a cycle.
  for (const auto& [child, parent] : o.parent_) {
    const std::string* cur = &child;
    std::size_t steps = 0;
    while (*cur != o.root_) {
      cur = &o.parent_.at(*cur);
      if (++steps > o.parent_.size())
        throw DataError("ontology: cycle through '" + child + "'");
    }
  }
  return o;
}

Ontology Ontology::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ontology file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("ontology: missing tab separator in line: " + line);
    entries.emplace_back(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
  }
  return from_entries(entries);
}

void Ontology::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ontology file: " + path);
  for (const auto& [child, parent] : parent_)
    out << child << '\t' << parent << '\n';
}

bool Ontology::contains(const std::string& name) const {
  return parent_.contains(name);
}

const std::string& Ontology::parent_of(const std::string& name) const {
  auto it = parent_.find(name);
  if (it == parent_.end())
    throw std::invalid_argument("unknown semantic type: " + name);
  return it->second;
}

bool type_matches(const SemanticType& required, const SemanticType& offered,
                  const Ontology& ontology) {
  if (!ontology.contains(required.name))
    throw std::invalid_argument("unknown semantic type: " + required.name);
  if (!ontology.contains(offered.name))
    throw std::invalid_argument("unknown semantic type: " + offered.name);
  const std::string* cur = &offered.name;
  while (true) {
    if (*cur == required.name) return true;
    if (*cur == ontology.root()) return false;
    cur = &ontology.parent_of(*cur);
  }
}

namespace {

bool parse_number(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

// Returns whether raw lies in [min, max] under the rule's ordering.
bool in_range(const InterpretingRule& rule, const std::string& raw) {
  if (rule.ordering == RawOrdering::Numeric) {
    double lo, hi, v;
    if (!parse_number(rule.input_min, lo) || !parse_number(rule.input_max, hi))
      throw std::invalid_argument("interpreting rule for '" + rule.ctype +
                                  "' has non-numeric bounds");
    if (lo > hi)
      throw std::invalid_argument("interpreting rule for '" + rule.ctype +
                                  "' has input_min > input_max");
    if (!parse_number(raw, v)) return false;
    return lo <= v && v <= hi;
  }
  if (rule.input_min > rule.input_max)
    throw std::invalid_argument("interpreting rule for '" + rule.ctype +
                                "' has input_min > input_max");
  return rule.input_min <= raw && raw <= rule.input_max;
}

}  // namespace

std::optional<ContextValue> interpret_context(
    const std::string& ctype, const std::string& raw,
    const std::vector<InterpretingRule>& rules) {
  for (const auto& rule : rules) {
    if (rule.ctype != ctype) continue;
    if (in_range(rule, raw)) return ContextValue{ctype, rule.output};
  }
  return std::nullopt;
}

bool has_context(const QueryRecord& r, const ContextValue& c) {
  return std::find(r.contexts.begin(), r.contexts.end(), c) != r.contexts.end();
}

void validate_record(const QueryRecord& r) {
  if (r.query.qid.empty()) throw std::invalid_argument("record with empty qid");
  std::set<std::string> seen;
  for (const auto& c : r.contexts)
    if (!seen.insert(c.ctype).second)
      throw std::invalid_argument("record '" + r.query.qid +
                                  "' holds two values for context type '" +
                                  c.ctype + "'");
}

double rating_value(RatingLevel level) {
  switch (level) {
    case RatingLevel::Apprentice: return 0.6;
    case RatingLevel::Journeyer: return 0.8;
    case RatingLevel::Master: return 1.0;
  }
  throw std::logic_error("bad RatingLevel");
}

const char* rating_name(RatingLevel level) {
  switch (level) {
    case RatingLevel::Apprentice: return "apprentice";
    case RatingLevel::Journeyer: return "journeyer";
    case RatingLevel::Master: return "master";
  }
  throw std::logic_error("bad RatingLevel");
}

std::optional<RatingLevel> rating_from_value(double value) {
  for (auto level : {RatingLevel::Apprentice, RatingLevel::Journeyer,
                     RatingLevel::Master})
    if (std::fabs(value - rating_value(level)) < 1e-9) return level;
  return std::nullopt;
}

std::optional<RatingLevel> rating_from_word(const std::string& word) {
  std::string lower;
  lower.reserve(word.size());
  for (char ch : word) lower.push_back(static_cast<char>(std::tolower(
      static_cast<unsigned char>(ch))));
  for (auto level : {RatingLevel::Apprentice, RatingLevel::Journeyer,
                     RatingLevel::Master})
    if (lower == rating_name(level)) return level;
  return std::nullopt;
}

RatingLevel nearest_rating(double score) {
  if (score < 0.7) return RatingLevel::Apprentice;
  if (score < 0.9) return RatingLevel::Journeyer;
  return RatingLevel::Master;
}

void validate_description(const ServiceDescription& sd) {
  if (sd.sdm_bytes < 0 || sd.owl_bytes < 0)
    throw std::invalid_argument("service description with negative byte size");
  std::set<std::string> names;
  for (const auto& s : sd.services)
    if (!names.insert(s.sname).second)
      throw std::invalid_argument("duplicate service name '" + s.sname +
                                  "' for provider " + sd.provider);
}

}  // namespace msnp
