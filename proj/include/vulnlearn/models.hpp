#pragma once

#include <cstdint>
#include <vector>

namespace vulnlearn {

enum class ModelKind { RandomForest, Svm, ResNet };

struct Prediction {
  int label = 0;
  // Vote fraction (random forest), signed margin (SVM) or predicted
  // probability (ResNet). label = 1 iff the score reaches the model's
  // decision threshold: 0.5 for probabilistic scores, 0 for margins.
  double score = 0;
};

void check_features_finite(const std::vector<std::vector<double>>& X);
void check_binary_labels(const std::vector<int>& y);

}  // namespace vulnlearn
