#include "vulnlearn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vulnlearn {

Confusion confusion(const std::vector<int>& labels,
                    const std::vector<int>& predictions) {
  if (labels.size() != predictions.size())
    throw std::invalid_argument("confusion: length mismatch (" +
                                std::to_string(labels.size()) + " labels vs " +
                                std::to_string(predictions.size()) +
                                " predictions)");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1))
      throw std::invalid_argument("confusion: values must be binary");
    if (y == 1 && p == 1) ++c.tp;
    else if (y == 1 && p == 0) ++c.fn;
    else if (y == 0 && p == 1) ++c.fp;
    else ++c.tn;
  }
  return c;
}

RateMetrics metrics(const Confusion& c) {
  RateMetrics m;
  m.precision = c.tp + c.fp > 0
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : 0.0;
  m.recall = c.tp + c.fn > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.fpr = c.fp + c.tn > 0
              ? static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn)
              : 0.0;
  return m;
}

namespace {

void check_score_input(const std::vector<double>& scores,
                       const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: length mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == 0) has_neg = true;
    else throw std::invalid_argument("auc: labels must be binary");
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("auc: both classes must be present");
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_score_input(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over tie groups
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double rank_sum_pos = 0;
  std::int64_t n_pos = 0, n_neg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == 1) {
      rank_sum_pos += rank[k];
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) *
                                      (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_score_input(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::int64_t total_pos = 0;
  for (int y : labels) total_pos += y;

  double area = 0;
  double prev_recall = 0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    // advance over one threshold group (equal scores enter together)
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++tp;
      else ++fp;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

void aggregate(std::vector<ScoreSet>& group) {
  if (group.empty()) throw std::invalid_argument("aggregate: empty group");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (auto& s : group) {
    s.x = s.precision + s.recall + s.f1 + (1.0 - s.fpr) + s.roc_auc + s.pr_auc;
    lo = std::min(lo, s.x);
    hi = std::max(hi, s.x);
  }
  for (auto& s : group) s.z = hi > lo ? (s.x - lo) / (hi - lo) : 0.0;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("regularized_incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  // continued fraction (Lentz); standard symmetric split for convergence
  auto betacf = [](double aa, double bb, double xx) {
    const double tiny = 1e-300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * xx / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      const double m2 = 2.0 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };

  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
               a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double students_t_two_tailed_p(double t, int df) {
  if (df < 1) throw std::invalid_argument("students_t_two_tailed_p: df < 1");
  const double v = static_cast<double>(df);
  return regularized_incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

double paired_t_test(const std::vector<double>& za,
                     const std::vector<double>& zb) {
  if (za.size() != zb.size())
    throw std::invalid_argument("paired_t_test: length mismatch");
  const std::size_t n = za.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");

  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += za[i] - zb[i];
  mean /= static_cast<double>(n);

  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = za[i] - zb[i] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;

  const double t = mean / std::sqrt(var / static_cast<double>(n));
  return students_t_two_tailed_p(t, static_cast<int>(n) - 1);
}

}  // namespace vulnlearn
