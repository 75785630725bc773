#pragma once

#include <span>
#include <string>
#include <vector>

#include "proq/model.hpp"

namespace proq {

// Binary entropy, base 2. h(0) = h(1) = 0. p outside [0,1] throws
// std::domain_error.
double entropy(double p);

// Inverse of binary entropy. Returns the root on the same side of 0.5 as
// current_p (ties resolve to the upper root). h outside [0,1] throws
// std::domain_error. |entropy(result) - h| <= 1e-9.
double inverse_entropy(double h, double current_p);

// Both roots, lower then upper.
std::pair<double, double> entropy_roots(double h);

// Quality-weighted fusion of executed function outputs for one predicate.
// outputs[i] is the probability the object satisfies the predicate according
// to function i (already adjusted for the predicate operation), qualities[i]
// the function's quality. Spans must be equal-length and non-empty.
double combine_outputs(std::span<const double> outputs,
                       std::span<const double> qualities);

// Turns a raw tag-membership probability into the probability that the
// predicate holds under its operation.
inline double apply_op(double tag_prob, Op op) {
  return op == Op::Equal ? tag_prob : 1.0 - tag_prob;
}

struct EspDiagnostics {
  // Same-tag-type OR groups whose summed probability was clamped to 1.
  std::vector<std::string> clamped_or_groups;
  // AND over different tags of one single-valued tag type (always false).
  std::vector<std::string> contradictory_and_groups;
};

// Expression satisfaction probability from per-predicate probabilities
// (leaf_probs[i] corresponds to expr.predicates[i], already op-adjusted).
// AND of independent parts multiplies; OR over equality leaves on the same
// tag type adds (mutually exclusive tags) with a clamp at 1; everything else
// treats parts as independent. AND over distinct equality tags of the same
// tag type is contradictory and contributes 0. Duplicate leaves are fused
// before combination.
double esp(const Expression& expr, std::span<const double> leaf_probs,
           EspDiagnostics* diag = nullptr);

}  // namespace proq
