#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace vulnlearn {

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

// The six learning metrics of one experiment plus the aggregate
// x = P + R + F1 + (1 - FPR) + ROC_AUC + PR_AUC and its min-max normalized
// value z within a comparison group.
struct ScoreSet {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fpr = 0;
  double roc_auc = 0;
  double pr_auc = 0;
  double x = 0;
  double z = 0;
};

struct HypothesisOutcome {
  int hypothesis_id = 0;
  double p_value = 1.0;
  bool significant = false;
  std::size_t pairs = 0;
  std::array<std::size_t, 2> group_sizes{0, 0};
  std::string description;
};

Confusion confusion(const std::vector<int>& labels,
                    const std::vector<int>& predictions);

// P = tp/(tp+fp), R = tp/(tp+fn), F1 = harmonic mean, FPR = fp/(fp+tn).
// Zero denominators: P=0 when tp+fp=0, R=0 when tp+fn=0, F1=0 when P=R=0,
// FPR=0 when fp+tn=0.
struct RateMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fpr = 0;
};
RateMetrics metrics(const Confusion& c);

// Rank-statistic ROC AUC with tie correction (Mann-Whitney). Throws
// std::invalid_argument when only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-interpolated area under the precision-recall curve over all score
// thresholds (average precision).
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Fills x for every entry and z by min-max normalization over the group;
// when max == min all z are 0.
void aggregate(std::vector<ScoreSet>& group);

// Two-tailed paired Student's t-test, df = n-1. Zero-variance differences:
// p = 1 when the mean difference is 0, else 0.
double paired_t_test(const std::vector<double>& za, const std::vector<double>& zb);

double students_t_two_tailed_p(double t, int df);
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace vulnlearn
