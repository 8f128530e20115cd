#include "vulnlearn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "vulnlearn/serialize_util.hpp"

namespace vulnlearn {

namespace {

constexpr double kTwoPi = 6.283185307179586;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma) {
  double sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

// Pegasos on explicit features; returns {w, bias}
void pegasos_linear(const std::vector<std::vector<double>>& X,
                    const std::vector<int>& y, double C, int epochs,
                    std::mt19937_64& rng, std::vector<double>& w, double& bias) {
  const std::size_t n = X.size();
  const double lambda = 1.0 / (C * static_cast<double>(n));
  w.assign(X[0].size(), 0.0);
  bias = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      const double decay = 1.0 - eta * lambda;  // = 1 - 1/t
      for (double& v : w) v *= decay;
      if (yi * (dot(w, X[i]) + bias) < 1.0) {
        const double step = eta * yi;
        for (std::size_t d = 0; d < w.size(); ++d) w[d] += step * X[i][d];
        bias += step;
      }
    }
  }
}

}  // namespace

void check_features_finite(const std::vector<std::vector<double>>& X) {
  for (const auto& row : X)
    for (double v : row)
      if (!std::isfinite(v))
        throw std::invalid_argument("features must be finite");
}

void check_binary_labels(const std::vector<int>& y) {
  for (int v : y)
    if (v != 0 && v != 1)
      throw std::invalid_argument("labels must be 0 or 1");
}

std::vector<double> Svm::standardize(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d)
    out[d] = (x[d] - mean_[d]) / scale_[d];
  return out;
}

std::vector<double> Svm::rff_transform(const std::vector<double>& x) const {
  const std::size_t D = rff_w_.size();
  std::vector<double> z(D);
  const double norm = std::sqrt(2.0 / static_cast<double>(D));
  for (std::size_t r = 0; r < D; ++r)
    z[r] = norm * std::cos(dot(rff_w_[r], x) + rff_offset_[r]);
  return z;
}

Svm Svm::train(const std::vector<std::vector<double>>& X,
               const std::vector<int>& y, const SvmConfig& config) {
  if (X.size() != y.size() || X.size() < 2)
    throw std::invalid_argument("Svm::train: need at least 2 samples");
  check_features_finite(X);
  check_binary_labels(y);
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1)
    throw std::invalid_argument(
        "Svm::train: training labels contain a single class; provide examples "
        "of both classes");
  if (config.C <= 0 || config.epochs < 1)
    throw std::invalid_argument("Svm::train: C must be > 0 and epochs >= 1");

  Svm svm;
  svm.config_ = config;
  svm.feature_dim_ = static_cast<int>(X[0].size());

  const std::size_t n = X.size();
  const std::size_t dim = X[0].size();
  svm.mean_.assign(dim, 0.0);
  svm.scale_.assign(dim, 1.0);
  for (const auto& row : X)
    for (std::size_t d = 0; d < dim; ++d) svm.mean_[d] += row[d];
  for (double& m : svm.mean_) m /= static_cast<double>(n);
  std::vector<double> var(dim, 0.0);
  for (const auto& row : X)
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = row[d] - svm.mean_[d];
      var[d] += c * c;
    }
  for (std::size_t d = 0; d < dim; ++d) {
    var[d] /= static_cast<double>(n);
    svm.scale_[d] = var[d] > 0 ? std::sqrt(var[d]) : 1.0;
  }

  std::vector<std::vector<double>> Z(n);
  for (std::size_t i = 0; i < n; ++i) Z[i] = svm.standardize(X[i]);

  if (config.gamma > 0) {
    svm.gamma_ = config.gamma;
  } else {
    double total_var = 0;
    for (const auto& row : Z)
      for (double v : row) total_var += v * v;
    total_var /= static_cast<double>(n * dim);
    svm.gamma_ = total_var > 0 ? 1.0 / (static_cast<double>(dim) * total_var)
                               : 1.0 / static_cast<double>(dim);
  }

  std::mt19937_64 rng(config.seed);

  if (config.kernel == SvmKernel::Linear) {
    pegasos_linear(Z, y, config.C, config.epochs, rng, svm.w_, svm.bias_);
    return svm;
  }

  if (n > static_cast<std::size_t>(config.exact_kernel_max_n)) {
    // random Fourier features: w ~ N(0, 2*gamma*I), offset ~ U[0, 2pi)
    svm.use_rff_ = true;
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 * svm.gamma_));
    std::uniform_real_distribution<double> unif(0.0, kTwoPi);
    svm.rff_w_.assign(config.rff_features, std::vector<double>(dim));
    svm.rff_offset_.resize(config.rff_features);
    for (auto& row : svm.rff_w_)
      for (double& v : row) v = gauss(rng);
    for (double& v : svm.rff_offset_) v = unif(rng);

    std::vector<std::vector<double>> features(n);
    for (std::size_t i = 0; i < n; ++i) features[i] = svm.rff_transform(Z[i]);
    pegasos_linear(features, y, config.C, config.epochs, rng, svm.w_, svm.bias_);
    return svm;
  }

  // exact kernel Pegasos on the precomputed Gram matrix
  std::vector<std::vector<double>> gram(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      gram[i][j] = gram[j][i] = rbf_kernel(Z[i], Z[j], svm.gamma_);

  const double lambda = 1.0 / (config.C * static_cast<double>(n));
  std::vector<std::int64_t> alpha(n, 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      double val = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] == 0) continue;
        const double yj = y[j] == 1 ? 1.0 : -1.0;
        val += static_cast<double>(alpha[j]) * yj * gram[j][i];
      }
      val /= lambda * static_cast<double>(t);
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      if (yi * val < 1.0) ++alpha[i];
    }
  }
  const double denom = lambda * static_cast<double>(t);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] == 0) continue;
    const double yj = y[j] == 1 ? 1.0 : -1.0;
    svm.support_.push_back(Z[j]);
    svm.coef_.push_back(static_cast<double>(alpha[j]) * yj / denom);
  }
  return svm;
}

double Svm::margin(const std::vector<double>& z) const {
  if (config_.kernel == SvmKernel::Linear) return dot(w_, z) + bias_;
  if (use_rff_) return dot(w_, rff_transform(z)) + bias_;
  double val = 0;
  for (std::size_t j = 0; j < support_.size(); ++j)
    val += coef_[j] * rbf_kernel(support_[j], z, gamma_);
  return val;
}

Prediction Svm::predict_one(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != feature_dim_)
    throw std::invalid_argument("Svm::predict: dimension mismatch");
  for (double v : x)
    if (!std::isfinite(v))
      throw std::invalid_argument("Svm::predict: features must be finite");
  Prediction p;
  p.score = margin(standardize(x));
  p.label = p.score >= 0.0 ? 1 : 0;
  return p;
}

std::vector<Prediction> Svm::predict(
    const std::vector<std::vector<double>>& X) const {
  std::vector<Prediction> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(predict_one(x));
  return out;
}

namespace {

void write_vec(std::ostream& out, const std::vector<double>& v) {
  io::write_u64(out, v.size());
  for (double x : v) io::write_f64(out, x);
}

std::vector<double> read_vec(std::istream& in) {
  std::vector<double> v(io::read_u64(in));
  for (double& x : v) x = io::read_f64(in);
  return v;
}

void write_mat(std::ostream& out, const std::vector<std::vector<double>>& m) {
  io::write_u64(out, m.size());
  for (const auto& row : m) write_vec(out, row);
}

std::vector<std::vector<double>> read_mat(std::istream& in) {
  std::vector<std::vector<double>> m(io::read_u64(in));
  for (auto& row : m) row = read_vec(in);
  return m;
}

}  // namespace

void Svm::save(std::ostream& out) const {
  io::write_u32(out, 1);
  io::write_i32(out, feature_dim_);
  io::write_i32(out, static_cast<int>(config_.kernel));
  io::write_f64(out, config_.C);
  io::write_i32(out, config_.epochs);
  io::write_u64(out, config_.seed);
  io::write_f64(out, gamma_);
  io::write_u32(out, use_rff_ ? 1 : 0);
  write_vec(out, mean_);
  write_vec(out, scale_);
  write_vec(out, w_);
  io::write_f64(out, bias_);
  write_mat(out, support_);
  write_vec(out, coef_);
  write_mat(out, rff_w_);
  write_vec(out, rff_offset_);
}

Svm Svm::load(std::istream& in) {
  if (io::read_u32(in) != 1)
    throw std::runtime_error("Svm::load: unsupported format");
  Svm svm;
  svm.feature_dim_ = io::read_i32(in);
  svm.config_.kernel = static_cast<SvmKernel>(io::read_i32(in));
  svm.config_.C = io::read_f64(in);
  svm.config_.epochs = io::read_i32(in);
  svm.config_.seed = io::read_u64(in);
  svm.gamma_ = io::read_f64(in);
  svm.use_rff_ = io::read_u32(in) == 1;
  svm.mean_ = read_vec(in);
  svm.scale_ = read_vec(in);
  svm.w_ = read_vec(in);
  svm.bias_ = io::read_f64(in);
  svm.support_ = read_mat(in);
  svm.coef_ = read_vec(in);
  svm.rff_w_ = read_mat(in);
  svm.rff_offset_ = read_vec(in);
  return svm;
}

}  // namespace vulnlearn
