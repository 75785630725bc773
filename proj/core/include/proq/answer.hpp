#pragma once

#include <span>
#include <string>
#include <vector>

namespace proq {

// Expected F_alpha of an answer set: candidates' satisfaction probabilities
// are answer_probs, all_probs covers the full object set. Empty answer
// scores 0.
double expected_f(std::span<const double> answer_probs,
                  std::span<const double> all_probs, double alpha);

struct AnswerSelection {
  std::vector<int> answer;  // indices into the caller's arrays, by
                            // probability desc, id asc
  double threshold = 1.0;   // satisfaction probability of the last member;
                            // 1.0 sentinel for the empty answer
  double expected = 0.0;    // E(F_alpha) of the answer
};

// Quality-maximizing answer set over satisfaction probabilities. ids break
// ordering ties ascending. Scans prefixes of the sorted order and stops at
// the first strict decrease of expected quality; prefixes with zero
// probability mass are never chosen, so all-zero inputs give an empty
// answer. Spans must be equal length.
AnswerSelection select_answer_set(std::span<const std::string> ids,
                                  std::span<const double> probs, double alpha);

// Threshold optimality check for a descending probability vector and a
// 1-based cut tau: the marginal member earns its place and the next one
// would not. Lemma-style bounds, strict inequalities; the upper check is
// vacuous at tau == n. tau outside [1, n] throws std::out_of_range.
bool verify_threshold(std::span<const double> sorted_probs, std::size_t tau,
                      double alpha);

}  // namespace proq
