#include "proq/model.hpp"

#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace proq {

using nlohmann::ordered_json;

int TagType::tag_index(const std::string& tag) const {
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) return static_cast<int>(i);
  return -1;
}

int TagType::function_index(const std::string& fn_id) const {
  for (std::size_t i = 0; i < functions.size(); ++i)
    if (functions[i].id == fn_id) return static_cast<int>(i);
  return -1;
}

const TagType* Schema::find(const std::string& tt_id) const {
  for (const auto& tt : tag_types)
    if (tt.id == tt_id) return &tt;
  return nullptr;
}

int Schema::index_of(const std::string& tt_id) const {
  for (std::size_t i = 0; i < tag_types.size(); ++i)
    if (tag_types[i].id == tt_id) return static_cast<int>(i);
  return -1;
}

namespace {

struct Token {
  enum class Kind { Ident, Str, LParen, RParen, And, Or, Not, End };
  Kind kind;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
    if (i_ >= s_.size()) return {Token::Kind::End, ""};
    char c = s_[i_];
    if (c == '(') { ++i_; return {Token::Kind::LParen, "("}; }
    if (c == ')') { ++i_; return {Token::Kind::RParen, ")"}; }
    if (c == '"') {
      ++i_;
      std::string out;
      while (i_ < s_.size() && s_[i_] != '"') out += s_[i_++];
      if (i_ >= s_.size()) throw ConfigError("unterminated string literal");
      ++i_;
      return {Token::Kind::Str, out};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string out;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) ||
              s_[i_] == '_'))
        out += s_[i_++];
      std::string up;
      for (char ch : out) up += static_cast<char>(std::toupper(ch));
      if (up == "AND") return {Token::Kind::And, out};
      if (up == "OR") return {Token::Kind::Or, out};
      if (up == "NOT") return {Token::Kind::Not, out};
      return {Token::Kind::Ident, out};
    }
    throw ConfigError("unexpected character in expression: " +
                      std::string(1, c));
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  Parser(const std::string& text, const Schema& schema)
      : lex_(text), schema_(schema) {
    advance();
  }

  Expression parse() {
    Expression e;
    e.root = parse_or(e);
    if (cur_.kind != Token::Kind::End)
      throw ConfigError("trailing input after expression");
    if (e.predicates.empty()) throw ConfigError("empty expression");
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  ExprNode parse_or(Expression& e) {
    ExprNode first = parse_and(e);
    if (cur_.kind != Token::Kind::Or) return first;
    ExprNode node;
    node.kind = ExprNode::Kind::Or;
    node.children.push_back(std::move(first));
    while (cur_.kind == Token::Kind::Or) {
      advance();
      node.children.push_back(parse_and(e));
    }
    return node;
  }

  ExprNode parse_and(Expression& e) {
    ExprNode first = parse_atom(e);
    if (cur_.kind != Token::Kind::And) return first;
    ExprNode node;
    node.kind = ExprNode::Kind::And;
    node.children.push_back(std::move(first));
    while (cur_.kind == Token::Kind::And) {
      advance();
      node.children.push_back(parse_atom(e));
    }
    return node;
  }

  ExprNode parse_atom(Expression& e) {
    bool negated = false;
    if (cur_.kind == Token::Kind::Not) {
      negated = true;
      advance();
      if (cur_.kind != Token::Kind::Ident)
        throw ConfigError("NOT applies to a predicate");
    }
    if (cur_.kind == Token::Kind::LParen) {
      advance();
      ExprNode inner = parse_or(e);
      if (cur_.kind != Token::Kind::RParen)
        throw ConfigError("missing closing parenthesis");
      advance();
      return inner;
    }
    if (cur_.kind != Token::Kind::Ident)
      throw ConfigError("expected predicate, got '" + cur_.text + "'");
    std::string tt = cur_.text;
    advance();
    if (cur_.kind != Token::Kind::LParen)
      throw ConfigError("expected '(' after tag type '" + tt + "'");
    advance();
    if (cur_.kind != Token::Kind::Str)
      throw ConfigError("expected quoted tag in predicate on '" + tt + "'");
    std::string tag = cur_.text;
    advance();
    if (cur_.kind != Token::Kind::RParen)
      throw ConfigError("expected ')' after tag");
    advance();

    const TagType* t = schema_.find(tt);
    if (!t) throw ConfigError("unknown tag type: " + tt);
    if (t->tag_index(tag) < 0)
      throw ConfigError("unknown tag '" + tag + "' for tag type '" + tt + "'");

    ExprNode leaf;
    leaf.kind = ExprNode::Kind::Leaf;
    leaf.leaf = static_cast<int>(e.predicates.size());
    e.predicates.push_back({tt, tag, negated ? Op::NotEqual : Op::Equal});
    return leaf;
  }

  Lexer lex_;
  const Schema& schema_;
  Token cur_;
};

void render_node(const Expression& e, const ExprNode& n, std::string& out,
                 bool parenthesize) {
  if (n.kind == ExprNode::Kind::Leaf) {
    const Predicate& p = e.predicates[n.leaf];
    if (p.op == Op::NotEqual) out += "NOT ";
    out += p.tag_type + "(\"" + p.tag + "\")";
    return;
  }
  const char* sep = n.kind == ExprNode::Kind::And ? " AND " : " OR ";
  if (parenthesize) out += "(";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) out += sep;
    render_node(e, n.children[i], out, true);
  }
  if (parenthesize) out += ")";
}

}  // namespace

Expression parse_expression(const std::string& text, const Schema& schema) {
  return Parser(text, schema).parse();
}

std::string render_expression(const Expression& expr) {
  std::string out;
  render_node(expr, expr.root, out, false);
  return out;
}

namespace {

PreciseValue value_from_json(const ordered_json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError("unsupported precise value type: " + v.dump());
}

ordered_json value_to_json(const PreciseValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<double>(v)) {
    double d = std::get<double>(v);
    if (d == static_cast<long long>(d))
      return static_cast<long long>(d);  // keep integer texture
    return d;
  }
  return std::get<std::string>(v);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw ConfigError("dataset line " + std::to_string(lineno) + ": " +
                        e.what());
    }
    Object o;
    if (!j.contains("id")) throw ConfigError("dataset object without id");
    o.id = j["id"].get<std::string>();
    if (j.contains("precise"))
      for (auto& [k, v] : j["precise"].items())
        o.precise[k] = value_from_json(v);
    if (j.contains("truth"))
      for (auto& [k, v] : j["truth"].items())
        o.truth[k] = v.get<std::string>();
    ds.objects.push_back(std::move(o));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset: " + path);
  for (const auto& o : ds.objects) {
    ordered_json j;
    j["id"] = o.id;
    ordered_json pj = ordered_json::object();
    for (const auto& [k, v] : o.precise) pj[k] = value_to_json(v);
    j["precise"] = pj;
    ordered_json tj = ordered_json::object();
    for (const auto& [k, v] : o.truth) tj[k] = v;
    j["truth"] = tj;
    out << j.dump() << "\n";
  }
}

namespace {

bool value_matches(const PreciseValue& have, const PreciseCondition& cond) {
  switch (cond.kind) {
    case PreciseCondition::Kind::Eq:
      return have == cond.eq;
    case PreciseCondition::Kind::In:
      for (const auto& v : cond.in_set)
        if (have == v) return true;
      return false;
    case PreciseCondition::Kind::Range: {
      if (!std::holds_alternative<double>(have)) return false;
      double d = std::get<double>(have);
      return d >= cond.lo && d <= cond.hi;
    }
  }
  return false;
}

}  // namespace

bool matches_filter(const Object& obj, const PreciseFilter& filter) {
  for (const auto& [attr, cond] : filter) {
    auto it = obj.precise.find(attr);
    if (it == obj.precise.end())
      throw ConfigError("object " + obj.id + " lacks precise attribute '" +
                        attr + "'");
    if (!value_matches(it->second, cond)) return false;
  }
  return true;
}

std::vector<int> filter_precise(const Dataset& ds,
                                const PreciseFilter& filter) {
  std::vector<int> out;
  for (std::size_t i = 0; i < ds.objects.size(); ++i)
    if (matches_filter(ds.objects[i], filter)) out.push_back(static_cast<int>(i));
  return out;
}

int StateVector::count() const { return std::popcount(bits); }

bool StateVector::all() const {
  if (size <= 0) return true;
  std::uint32_t mask =
      size >= 32 ? ~0u : ((1u << size) - 1u);
  return (bits & mask) == mask;
}

StateVector make_state(int n_functions) {
  if (n_functions < 0 || n_functions > 32)
    throw std::out_of_range("state vector supports up to 32 functions");
  return StateVector{0, n_functions};
}

StateVector mark_executed(StateVector s, int j) {
  if (j < 0 || j >= s.size)
    throw std::out_of_range("function index outside state vector");
  s.bits |= (1u << j);
  return s;
}

}  // namespace proq
