#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace proq {

// Raised for malformed configs, datasets, expressions. The CLI maps this
// to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An enrichment function produces, for (object, tag), the probability that
// the object carries that tag. quality is its discrimination power in (0.5, 1],
// cost the expected execution time in abstract time units.
struct FunctionSpec {
  std::string id;
  double quality = 0.0;
  double cost = 0.0;
};

// An imprecise attribute: a closed tag vocabulary plus the functions that
// can estimate membership for it.
struct TagType {
  std::string id;
  std::vector<std::string> tags;
  std::vector<FunctionSpec> functions;

  int tag_index(const std::string& tag) const;
  int function_index(const std::string& fn_id) const;
};

struct Schema {
  std::vector<TagType> tag_types;

  const TagType* find(const std::string& tt_id) const;
  int index_of(const std::string& tt_id) const;
};

enum class Op { Equal, NotEqual };

// One leaf of a query expression: tag_type op tag.
struct Predicate {
  std::string tag_type;
  std::string tag;
  Op op = Op::Equal;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct ExprNode {
  enum class Kind { Leaf, And, Or };
  Kind kind = Kind::Leaf;
  int leaf = -1;  // index into Expression::predicates when kind == Leaf
  std::vector<ExprNode> children;

  friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

// Boolean combination (AND/OR, NOT only on leaves) over tag predicates.
struct Expression {
  ExprNode root;
  std::vector<Predicate> predicates;

  friend bool operator==(const Expression&, const Expression&) = default;
};

// Grammar: expr := and_term (OR and_term)* ; and_term := atom (AND atom)* ;
// atom := [NOT] ident '(' string ')' | '(' expr ')'. Tag types and tags are
// validated against the schema.
Expression parse_expression(const std::string& text, const Schema& schema);
std::string render_expression(const Expression& expr);

using PreciseValue = std::variant<bool, double, std::string>;

// Predicate over one precise attribute. Exactly one of the members is active.
struct PreciseCondition {
  enum class Kind { Eq, In, Range };
  Kind kind = Kind::Eq;
  PreciseValue eq;
  std::vector<PreciseValue> in_set;
  double lo = 0.0, hi = 0.0;  // inclusive bounds, numeric attributes only
};

// Conjunction over attribute names.
using PreciseFilter = std::map<std::string, PreciseCondition>;

struct Object {
  std::string id;
  std::map<std::string, PreciseValue> precise;
  std::map<std::string, std::string> truth;  // tag_type -> true tag

  bool payload_loaded = true;  // false while paged out in disk mode
};

struct Dataset {
  std::vector<Object> objects;
};

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Indices of objects satisfying the filter, in dataset order.
// Unknown attribute names raise ConfigError; a contradictory range
// (lo > hi) yields an empty result.
std::vector<int> filter_precise(const Dataset& ds, const PreciseFilter& filter);

bool matches_filter(const Object& obj, const PreciseFilter& filter);

// Per-predicate execution state of one object: bit j set means function j
// of the predicate's tag type has run. Capped at 32 functions per tag type.
struct StateVector {
  std::uint32_t bits = 0;
  int size = 0;

  bool test(int j) const { return (bits >> j) & 1u; }
  int count() const;
  bool none() const { return bits == 0; }
  bool all() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

StateVector make_state(int n_functions);
// Returns a copy with bit j set; throws std::out_of_range for bad j.
StateVector mark_executed(StateVector s, int j);

}  // namespace proq
