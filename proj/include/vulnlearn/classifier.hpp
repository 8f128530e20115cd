#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include "vulnlearn/models.hpp"
#include "vulnlearn/random_forest.hpp"
#include "vulnlearn/resnet.hpp"
#include "vulnlearn/svm.hpp"

namespace vulnlearn {

struct TrainSettings {
  RfConfig rf;
  SvmConfig svm;
  ResNetConfig resnet;

  // One knob to reseed all three model families coherently.
  void set_seed(std::uint64_t seed) {
    rf.seed = seed;
    svm.seed = seed;
    resnet.seed = seed;
  }
};

class Classifier {
 public:
  static Classifier train(ModelKind kind,
                          const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y,
                          const TrainSettings& settings);

  std::vector<Prediction> predict(const std::vector<std::vector<double>>& X) const;
  ModelKind kind() const;
  int feature_dim() const;

  void save(std::ostream& out) const;
  static Classifier load(std::istream& in);

 private:
  std::variant<RandomForest, Svm, ResNet> impl_;
};

}  // namespace vulnlearn
