#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vulnlearn/models.hpp"

namespace vulnlearn {

enum class SvmKernel { Linear, Rbf };

struct SvmConfig {
  SvmKernel kernel = SvmKernel::Linear;
  double C = 1.0;
  double gamma = 0;  // 0: auto 1/(d * var) on standardized features
  int epochs = 100;
  std::uint64_t seed = 1;
  // RBF is solved exactly (kernel Pegasos on a precomputed Gram matrix) up
  // to this many samples; beyond it a random Fourier feature approximation
  // bounds the memory.
  int exact_kernel_max_n = 2000;
  int rff_features = 256;
};

// Hinge-loss SVM trained with Pegasos-style sub-gradient descent. Features
// are standardized internally (mean 0, var 1, from the training set). The
// prediction score is the signed margin; label = 1 iff margin >= 0.
class Svm {
 public:
  static Svm train(const std::vector<std::vector<double>>& X,
                   const std::vector<int>& y, const SvmConfig& config);

  Prediction predict_one(const std::vector<double>& x) const;
  std::vector<Prediction> predict(const std::vector<std::vector<double>>& X) const;

  int feature_dim() const { return feature_dim_; }
  const SvmConfig& config() const { return config_; }

  void save(std::ostream& out) const;
  static Svm load(std::istream& in);

 private:
  double margin(const std::vector<double>& standardized) const;
  std::vector<double> standardize(const std::vector<double>& x) const;
  std::vector<double> rff_transform(const std::vector<double>& x) const;

  SvmConfig config_;
  int feature_dim_ = 0;
  double gamma_ = 0;
  std::vector<double> mean_, scale_;

  // linear and RFF predictors
  std::vector<double> w_;
  double bias_ = 0;

  // exact RBF predictor
  std::vector<std::vector<double>> support_;
  std::vector<double> coef_;

  // RFF projection
  bool use_rff_ = false;
  std::vector<std::vector<double>> rff_w_;
  std::vector<double> rff_offset_;
};

}  // namespace vulnlearn
