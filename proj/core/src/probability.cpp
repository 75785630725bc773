#include "proq/probability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace proq {

double entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("entropy: p outside [0,1]");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::pair<double, double> entropy_roots(double h) {
  if (h < 0.0 || h > 1.0)
    throw std::domain_error("inverse_entropy: h outside [0,1]");
  // entropy is strictly decreasing on [0.5, 1]; bisect for the upper root.
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    if (entropy(mid) > h)
      lo = mid;
    else
      hi = mid;
  }
  double upper = 0.5 * (lo + hi);
  return {1.0 - upper, upper};
}

double inverse_entropy(double h, double current_p) {
  auto [lower, upper] = entropy_roots(h);
  return current_p < 0.5 ? lower : upper;
}

double combine_outputs(std::span<const double> outputs,
                       std::span<const double> qualities) {
  if (outputs.empty() || outputs.size() != qualities.size())
    throw std::invalid_argument("combine_outputs: bad spans");
  double qsum = 0.0;
  for (double q : qualities) qsum += q;
  if (qsum <= 0.0) throw std::invalid_argument("combine_outputs: zero quality");
  double p = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i)
    p += (qualities[i] / qsum) * outputs[i];
  return p;
}

namespace {

double eval_node(const Expression& e, const ExprNode& n,
                 std::span<const double> leaf_probs, EspDiagnostics* diag);

// Splits a composite node's children into deduplicated leaves and composite
// subtrees.
struct ChildParts {
  std::vector<int> leaves;  // predicate indices, duplicates removed
  std::vector<const ExprNode*> composite;
};

ChildParts split_children(const Expression& e, const ExprNode& n) {
  ChildParts parts;
  for (const ExprNode& c : n.children) {
    if (c.kind == ExprNode::Kind::Leaf) {
      bool dup = false;
      for (int seen : parts.leaves)
        if (e.predicates[seen] == e.predicates[c.leaf]) { dup = true; break; }
      if (!dup) parts.leaves.push_back(c.leaf);
    } else {
      parts.composite.push_back(&c);
    }
  }
  return parts;
}

double eval_and(const Expression& e, const ExprNode& n,
                std::span<const double> leaf_probs, EspDiagnostics* diag) {
  ChildParts parts = split_children(e, n);
  // Equality leaves of one single-valued tag type demand distinct tags at
  // once: impossible.
  std::map<std::string, std::vector<int>> eq_groups;
  double product = 1.0;
  for (int leaf : parts.leaves) {
    const Predicate& p = e.predicates[leaf];
    if (p.op == Op::Equal)
      eq_groups[p.tag_type].push_back(leaf);
    else
      product *= leaf_probs[leaf];
  }
  for (const auto& [tt, leaves] : eq_groups) {
    if (leaves.size() > 1) {
      if (diag) diag->contradictory_and_groups.push_back(tt);
      return 0.0;
    }
    product *= leaf_probs[leaves.front()];
  }
  for (const ExprNode* c : parts.composite)
    product *= eval_node(e, *c, leaf_probs, diag);
  return product;
}

double eval_or(const Expression& e, const ExprNode& n,
               std::span<const double> leaf_probs, EspDiagnostics* diag) {
  ChildParts parts = split_children(e, n);
  // Equality leaves on one tag type are mutually exclusive: probabilities
  // add. Everything else is treated as independent.
  std::map<std::string, std::vector<int>> eq_groups;
  std::vector<double> independent;
  for (int leaf : parts.leaves) {
    const Predicate& p = e.predicates[leaf];
    if (p.op == Op::Equal)
      eq_groups[p.tag_type].push_back(leaf);
    else
      independent.push_back(leaf_probs[leaf]);
  }
  for (const auto& [tt, leaves] : eq_groups) {
    double s = 0.0;
    for (int leaf : leaves) s += leaf_probs[leaf];
    if (s > 1.0) {
      if (diag) diag->clamped_or_groups.push_back(tt);
      s = 1.0;
    }
    independent.push_back(s);
  }
  for (const ExprNode* c : parts.composite)
    independent.push_back(eval_node(e, *c, leaf_probs, diag));
  double none = 1.0;
  for (double v : independent) none *= (1.0 - v);
  return 1.0 - none;
}

double eval_node(const Expression& e, const ExprNode& n,
                 std::span<const double> leaf_probs, EspDiagnostics* diag) {
  switch (n.kind) {
    case ExprNode::Kind::Leaf:
      return leaf_probs[n.leaf];
    case ExprNode::Kind::And:
      return eval_and(e, n, leaf_probs, diag);
    case ExprNode::Kind::Or:
      return eval_or(e, n, leaf_probs, diag);
  }
  return 0.0;
}

}  // namespace

double esp(const Expression& expr, std::span<const double> leaf_probs,
           EspDiagnostics* diag) {
  if (leaf_probs.size() != expr.predicates.size())
    throw std::invalid_argument("esp: leaf probability count mismatch");
  double v = eval_node(expr, expr.root, leaf_probs, diag);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace proq
