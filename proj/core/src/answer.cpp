#include "proq/answer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace proq {

double expected_f(std::span<const double> answer_probs,
                  std::span<const double> all_probs, double alpha) {
  if (answer_probs.empty()) return 0.0;
  double sa = 0.0, so = 0.0;
  for (double p : answer_probs) sa += p;
  for (double p : all_probs) so += p;
  double denom = alpha * so + static_cast<double>(answer_probs.size());
  if (denom <= 0.0) return 0.0;
  return (1.0 + alpha) * sa / denom;
}

AnswerSelection select_answer_set(std::span<const std::string> ids,
                                  std::span<const double> probs, double alpha) {
  if (ids.size() != probs.size())
    throw std::invalid_argument("select_answer_set: span size mismatch");
  const std::size_t n = probs.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return ids[a] < ids[b];
  });

  double total = 0.0;
  for (double p : probs) total += p;

  // Expected quality over sorted prefixes rises to a single peak (plateaus
  // allowed) and then falls; scan until the first strict decrease and keep
  // the longest best prefix with positive mass.
  double cum = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  double best_score = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    cum += probs[order[k - 1]];
    double s = (1.0 + alpha) * cum / (alpha * total + static_cast<double>(k));
    if (s < prev) break;
    prev = s;
    if (s > 0.0) {
      best_k = k;
      best_score = s;
    }
  }

  AnswerSelection sel;
  sel.answer.assign(order.begin(), order.begin() + best_k);
  sel.expected = best_score;
  sel.threshold = best_k > 0 ? probs[order[best_k - 1]] : 1.0;
  return sel;
}

bool verify_threshold(std::span<const double> sorted_probs, std::size_t tau,
                      double alpha) {
  const std::size_t n = sorted_probs.size();
  if (tau < 1 || tau > n)
    throw std::out_of_range("verify_threshold: tau outside [1, n]");
  double total = 0.0;
  for (double p : sorted_probs) total += p;
  double s_prev = 0.0;
  for (std::size_t i = 0; i + 1 < tau; ++i) s_prev += sorted_probs[i];
  double s_tau = s_prev + sorted_probs[tau - 1];

  // The tau-th member must raise expected quality...
  double lower_bar =
      s_prev / (static_cast<double>(tau - 1) + alpha * total);
  if (!(sorted_probs[tau - 1] > lower_bar)) return false;
  // ...and the next candidate would lower it (vacuous at the tail).
  if (tau < n) {
    double upper_bar = s_tau / (static_cast<double>(tau) + alpha * total);
    if (!(sorted_probs[tau] < upper_bar)) return false;
  }
  return true;
}

}  // namespace proq
