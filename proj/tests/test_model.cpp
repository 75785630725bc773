#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "proq/model.hpp"

using namespace proq;

namespace {

Schema two_type_schema() {
  Schema s;
  TagType person;
  person.id = "person";
  person.tags = {"john", "david"};
  person.functions = {{"p0", 0.8, 1.0}};
  TagType expr;
  expr.id = "expression";
  expr.tags = {"smile", "frown"};
  expr.functions = {{"e0", 0.7, 0.5}};
  TagType gender;
  gender.id = "gender";
  gender.tags = {"male", "female"};
  gender.functions = {{"g0", 0.9, 2.0}};
  s.tag_types = {person, expr, gender};
  return s;
}

}  // namespace

TEST_CASE("single atom parses to one equality leaf") {
  Schema s = two_type_schema();
  Expression e = parse_expression("person(\"john\")", s);
  REQUIRE(e.predicates.size() == 1);
  CHECK(e.root.kind == ExprNode::Kind::Leaf);
  CHECK(e.predicates[0].tag_type == "person");
  CHECK(e.predicates[0].tag == "john");
  CHECK(e.predicates[0].op == Op::Equal);
}

TEST_CASE("conjunction of two atoms") {
  Schema s = two_type_schema();
  Expression e =
      parse_expression("person(\"john\") AND expression(\"smile\")", s);
  REQUIRE(e.predicates.size() == 2);
  REQUIRE(e.root.kind == ExprNode::Kind::And);
  REQUIRE(e.root.children.size() == 2);
  CHECK(e.root.children[0].leaf == 0);
  CHECK(e.root.children[1].leaf == 1);
}

TEST_CASE("nested or inside and") {
  Schema s = two_type_schema();
  Expression e = parse_expression(
      "gender(\"male\") AND (person(\"john\") OR person(\"david\"))", s);
  REQUIRE(e.root.kind == ExprNode::Kind::And);
  REQUIRE(e.root.children.size() == 2);
  CHECK(e.root.children[0].kind == ExprNode::Kind::Leaf);
  CHECK(e.root.children[1].kind == ExprNode::Kind::Or);
  CHECK(e.predicates.size() == 3);
}

TEST_CASE("not lowers to a not-equal leaf") {
  Schema s = two_type_schema();
  Expression e = parse_expression("NOT person(\"john\")", s);
  REQUIRE(e.predicates.size() == 1);
  CHECK(e.predicates[0].op == Op::NotEqual);
}

TEST_CASE("and binds tighter than or") {
  Schema s = two_type_schema();
  Expression e = parse_expression(
      "person(\"john\") OR expression(\"smile\") AND gender(\"male\")", s);
  REQUIRE(e.root.kind == ExprNode::Kind::Or);
  REQUIRE(e.root.children.size() == 2);
  CHECK(e.root.children[0].kind == ExprNode::Kind::Leaf);
  CHECK(e.root.children[1].kind == ExprNode::Kind::And);
}

TEST_CASE("keywords are case-insensitive") {
  Schema s = two_type_schema();
  Expression a = parse_expression("person(\"john\") and gender(\"male\")", s);
  Expression b = parse_expression("person(\"john\") AND gender(\"male\")", s);
  CHECK(a == b);
}

TEST_CASE("render and reparse round-trips") {
  Schema s = two_type_schema();
  const char* texts[] = {
      "person(\"john\")",
      "NOT person(\"david\")",
      "person(\"john\") AND expression(\"smile\")",
      "gender(\"male\") AND (person(\"john\") OR person(\"david\"))",
      "person(\"john\") OR expression(\"smile\") AND gender(\"male\")",
  };
  for (const char* t : texts) {
    Expression e = parse_expression(t, s);
    Expression again = parse_expression(render_expression(e), s);
    CHECK(e == again);
  }
}

TEST_CASE("parse errors carry ConfigError") {
  Schema s = two_type_schema();
  CHECK_THROWS_AS(parse_expression("unknown(\"x\")", s), ConfigError);
  CHECK_THROWS_AS(parse_expression("person(\"nobody\")", s), ConfigError);
  CHECK_THROWS_AS(parse_expression("person(\"john\") AND", s), ConfigError);
  CHECK_THROWS_AS(parse_expression("(person(\"john\")", s), ConfigError);
  CHECK_THROWS_AS(parse_expression("", s), ConfigError);
}

namespace {

Dataset small_dataset() {
  Dataset ds;
  for (int i = 0; i < 6; ++i) {
    Object o;
    o.id = "o" + std::to_string(i);
    o.precise["location"] = std::string(i < 3 ? "2080" : "3000");
    o.precise["score"] = static_cast<double>(i);
    o.precise["flag"] = (i % 2 == 0);
    o.truth["person"] = i % 2 == 0 ? "john" : "david";
    ds.objects.push_back(o);
  }
  return ds;
}

}  // namespace

TEST_CASE("empty filter keeps every object") {
  Dataset ds = small_dataset();
  CHECK(filter_precise(ds, {}).size() == ds.objects.size());
}

TEST_CASE("membership filter keeps matching rows only") {
  Dataset ds = small_dataset();
  PreciseFilter f;
  PreciseCondition c;
  c.kind = PreciseCondition::Kind::In;
  c.in_set = {PreciseValue(std::string("2080")),
              PreciseValue(std::string("2081"))};
  f["location"] = c;
  auto idx = filter_precise(ds, f);
  REQUIRE(idx.size() == 3);
  for (int i : idx) CHECK(std::get<std::string>(ds.objects[i].precise["location"]) == "2080");
}

TEST_CASE("range filter is inclusive and empty when contradictory") {
  Dataset ds = small_dataset();
  PreciseFilter f;
  PreciseCondition c;
  c.kind = PreciseCondition::Kind::Range;
  c.lo = 1.0;
  c.hi = 3.0;
  f["score"] = c;
  CHECK(filter_precise(ds, f).size() == 3);
  c.lo = 4.0;
  c.hi = 1.0;
  f["score"] = c;
  CHECK(filter_precise(ds, f).empty());
}

TEST_CASE("filter is idempotent") {
  Dataset ds = small_dataset();
  PreciseFilter f;
  PreciseCondition c;
  c.kind = PreciseCondition::Kind::Eq;
  c.eq = PreciseValue(true);
  f["flag"] = c;
  auto once = filter_precise(ds, f);
  Dataset narrowed;
  for (int i : once) narrowed.objects.push_back(ds.objects[i]);
  auto twice = filter_precise(narrowed, f);
  CHECK(twice.size() == once.size());
}

TEST_CASE("unknown filter attribute raises") {
  Dataset ds = small_dataset();
  PreciseFilter f;
  f["missing"] = PreciseCondition{};
  CHECK_THROWS_AS(filter_precise(ds, f), ConfigError);
}

TEST_CASE("dataset round-trips through json lines") {
  namespace fs = std::filesystem;
  Dataset ds = small_dataset();
  fs::path p = fs::temp_directory_path() / "proq_test_dataset.jsonl";
  save_dataset(ds, p.string());
  Dataset back = load_dataset(p.string());
  REQUIRE(back.objects.size() == ds.objects.size());
  for (std::size_t i = 0; i < ds.objects.size(); ++i) {
    CHECK(back.objects[i].id == ds.objects[i].id);
    CHECK(back.objects[i].precise == ds.objects[i].precise);
    CHECK(back.objects[i].truth == ds.objects[i].truth);
  }
  fs::remove(p);
}

TEST_CASE("state vector marks bits and stays idempotent") {
  StateVector s = make_state(4);
  CHECK(s.none());
  CHECK_FALSE(s.all());
  s = mark_executed(s, 3);
  CHECK(s.bits == 0b1000u);
  CHECK(s.count() == 1);
  s = mark_executed(s, 3);
  CHECK(s.bits == 0b1000u);
  StateVector t = make_state(4);
  t = mark_executed(mark_executed(t, 2), 3);
  t = mark_executed(t, 0);
  CHECK(t.bits == 0b1101u);
  CHECK_THROWS_AS(mark_executed(s, 4), std::out_of_range);
  CHECK_THROWS_AS(mark_executed(s, -1), std::out_of_range);
  CHECK_THROWS_AS(make_state(33), std::out_of_range);
  StateVector full = make_state(2);
  full = mark_executed(mark_executed(full, 0), 1);
  CHECK(full.all());
}

TEST_CASE("schema lookups") {
  Schema s = two_type_schema();
  REQUIRE(s.find("person") != nullptr);
  CHECK(s.find("person")->tag_index("david") == 1);
  CHECK(s.find("person")->tag_index("nobody") == -1);
  CHECK(s.find("nothing") == nullptr);
  CHECK(s.index_of("expression") == 1);
}
