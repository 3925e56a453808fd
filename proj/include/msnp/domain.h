#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace msnp {

// Raised by loaders and parsers on unreadable or malformed input.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

using PeerId = std::string;

// Reference to an ontology concept. Identity is the concept name; the
// parent relation lives in the Ontology.
struct SemanticType {
  std::string name;
  auto operator<=>(const SemanticType&) const = default;
};

// Rooted concept tree. Construction rejects cycles, dangling parents,
// duplicate concepts and multiple roots.
class Ontology {
 public:
  Ontology() = default;

  static Ontology from_entries(
      const std::vector<std::pair<std::string, std::string>>& child_parent);

  // File format: one concept per line, `child<TAB>parent`, the root line
  // has an empty parent field. '#' starts a comment.
  static Ontology load_file(const std::string& path);
  void save_file(const std::string& path) const;

  bool contains(const std::string& name) const;
  const std::string& root() const { return root_; }
  std::size_t size() const { return parent_.size(); }
  // Parent name, empty for the root. Throws std::invalid_argument on an
  // unknown concept.
  const std::string& parent_of(const std::string& name) const;

 private:
  std::map<std::string, std::string> parent_;  // concept -> parent ("" at root)
  std::string root_;
};

// true iff `offered` equals `required` or descends from it in the tree.
// Unknown types signal a malformed ontology reference.
bool type_matches(const SemanticType& required, const SemanticType& offered,
                  const Ontology& ontology);

struct ContextValue {
  std::string ctype;
  std::string value;
  auto operator<=>(const ContextValue&) const = default;
};

enum class RawOrdering { Lexicographic, Numeric };

// Maps a raw sensor reading onto an interpreted context value. The rule
// declares how its [input_min, input_max] bounds are ordered.
struct InterpretingRule {
  std::string ctype;
  std::string input_min;
  std::string input_max;
  std::string output;
  RawOrdering ordering = RawOrdering::Lexicographic;
};

// First rule whose ctype matches and whose range contains the raw value
// wins. No match is a valid absent result.
std::optional<ContextValue> interpret_context(
    const std::string& ctype, const std::string& raw,
    const std::vector<InterpretingRule>& rules);

struct Query {
  std::string qid;
  SemanticType stype;
  std::vector<std::string> parameters;
};

// Query identity is the qid alone; parameters do not participate.
inline bool operator==(const Query& a, const Query& b) { return a.qid == b.qid; }
inline bool operator<(const Query& a, const Query& b) { return a.qid < b.qid; }

// One historical query plus the context snapshot captured when it was
// issued. Holds at most one value per context type.
struct QueryRecord {
  Query query;
  std::vector<ContextValue> contexts;
};

bool has_context(const QueryRecord& r, const ContextValue& c);
void validate_record(const QueryRecord& r);

struct ImportanceRule {
  std::string ctype;
  std::optional<std::string> qid;  // absent = global rule
  double weight = 0.0;             // >= 0, default 0 = equal importance
};

struct FilterRule {
  std::string qid;
  std::set<std::string> ignored_ctypes;  // non-empty
};

enum class RatingLevel { Apprentice, Journeyer, Master };

double rating_value(RatingLevel level);  // 0.6 / 0.8 / 1.0
const char* rating_name(RatingLevel level);
std::optional<RatingLevel> rating_from_value(double value);
std::optional<RatingLevel> rating_from_word(const std::string& word);
// Nearest discrete level to a score; midpoints (0.7, 0.9) round up.
RatingLevel nearest_rating(double score);

struct Service {
  std::string sname;
  SemanticType stype;
};

// Provider-advertised services plus metadata document sizes. Defaults
// are 6KB SAWSDL and 12KB OWL.
struct ServiceDescription {
  PeerId provider;
  std::vector<Service> services;  // snames unique within one description
  std::int64_t sdm_bytes = 6144;
  std::int64_t owl_bytes = 12288;
  bool cached_sdm_available = false;
};

void validate_description(const ServiceDescription& sd);

}  // namespace msnp
