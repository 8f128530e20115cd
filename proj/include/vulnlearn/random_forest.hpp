#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vulnlearn/models.hpp"

namespace vulnlearn {

enum class FeatureRule { Sqrt, Log2, All };

struct RfConfig {
  int n_trees = 100;
  int max_depth = -1;  // unlimited
  int min_samples_split = 2;
  FeatureRule features_per_split = FeatureRule::Sqrt;
  std::uint64_t seed = 1;
};

// Bootstrap-aggregated decision trees with Gini-impurity splits. The score of
// a sample is exactly (trees voting class 1) / n_trees. Rows are canonically
// sorted before any sampling, so predictions do not depend on training-row
// order.
class RandomForest {
 public:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    int label = 0;
  };

  static RandomForest train(const std::vector<std::vector<double>>& X,
                            const std::vector<int>& y, const RfConfig& config);

  Prediction predict_one(const std::vector<double>& x) const;
  std::vector<Prediction> predict(const std::vector<std::vector<double>>& X) const;

  int feature_dim() const { return feature_dim_; }
  const RfConfig& config() const { return config_; }

  void save(std::ostream& out) const;
  static RandomForest load(std::istream& in);

 private:
  RfConfig config_;
  int feature_dim_ = 0;
  std::vector<std::vector<Node>> trees_;

  friend bool operator==(const RandomForest&, const RandomForest&);
};

}  // namespace vulnlearn
