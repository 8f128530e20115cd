#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

#include "vulnlearn/models.hpp"

namespace vulnlearn {

struct ResNetConfig {
  int blocks = 7;
  int channels = 8;
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  bool standardize = true;
};

// 1-D convolution, stride 1. Tensors are [channel][position] flattened
// row-major; the length is preserved by (kernel 3, pad 1) and (kernel 1,
// pad 0), the two shapes used here.
template <typename T>
struct Conv1D {
  int in_ch = 0, out_ch = 0, ksize = 0, pad = 0;
  std::vector<T> w;   // [out][in][k]
  std::vector<T> b;   // [out]
  std::vector<T> gw;  // accumulated gradients
  std::vector<T> gb;

  void init(int in_channels, int out_channels, int kernel, int padding,
            std::mt19937_64& rng) {
    in_ch = in_channels;
    out_ch = out_channels;
    ksize = kernel;
    pad = padding;
    w.resize(static_cast<std::size_t>(out_ch) * in_ch * ksize);
    b.assign(out_ch, T(0));
    gw.assign(w.size(), T(0));
    gb.assign(b.size(), T(0));
    std::normal_distribution<double> gauss(
        0.0, std::sqrt(2.0 / static_cast<double>(in_ch * ksize)));
    for (auto& v : w) v = static_cast<T>(gauss(rng));
  }

  std::vector<T> forward(const std::vector<T>& x, int len) const {
    std::vector<T> out(static_cast<std::size_t>(out_ch) * len);
    for (int o = 0; o < out_ch; ++o) {
      for (int i = 0; i < len; ++i) {
        T acc = b[o];
        for (int c = 0; c < in_ch; ++c) {
          const T* xc = x.data() + static_cast<std::size_t>(c) * len;
          const T* woc =
              w.data() + (static_cast<std::size_t>(o) * in_ch + c) * ksize;
          for (int t = 0; t < ksize; ++t) {
            const int j = i + t - pad;
            if (j >= 0 && j < len) acc += woc[t] * xc[j];
          }
        }
        out[static_cast<std::size_t>(o) * len + i] = acc;
      }
    }
    return out;
  }

  // accumulates gw/gb, returns gradient w.r.t. x
  std::vector<T> backward(const std::vector<T>& x, const std::vector<T>& gout,
                          int len) {
    std::vector<T> gx(static_cast<std::size_t>(in_ch) * len, T(0));
    for (int o = 0; o < out_ch; ++o) {
      const T* go = gout.data() + static_cast<std::size_t>(o) * len;
      for (int i = 0; i < len; ++i) gb[o] += go[i];
      for (int c = 0; c < in_ch; ++c) {
        const T* xc = x.data() + static_cast<std::size_t>(c) * len;
        T* gxc = gx.data() + static_cast<std::size_t>(c) * len;
        T* gwoc =
            gw.data() + (static_cast<std::size_t>(o) * in_ch + c) * ksize;
        const T* woc =
            w.data() + (static_cast<std::size_t>(o) * in_ch + c) * ksize;
        for (int t = 0; t < ksize; ++t) {
          const int shift = t - pad;
          T acc_w = T(0);
          for (int i = 0; i < len; ++i) {
            const int j = i + shift;
            if (j < 0 || j >= len) continue;
            acc_w += go[i] * xc[j];
            gxc[j] += woc[t] * go[i];
          }
          gwoc[t] += acc_w;
        }
      }
    }
    return gx;
  }

  void sgd_step(T lr, T inv_batch) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= lr * gw[i] * inv_batch;
      gw[i] = T(0);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i] -= lr * gb[i] * inv_batch;
      gb[i] = T(0);
    }
  }
};

// Pre-activation residual block:
//   y = h(x) + conv2(relu(conv1(relu(x))))
// with h = identity when the channel counts match, else a 1x1 convolution.
template <typename T>
struct ResidualBlock {
  Conv1D<T> conv1, conv2;
  Conv1D<T> shortcut;  // used iff project
  bool project = false;

  void init(int in_ch, int out_ch, std::mt19937_64& rng) {
    conv1.init(in_ch, out_ch, 3, 1, rng);
    conv2.init(out_ch, out_ch, 3, 1, rng);
    project = in_ch != out_ch;
    if (project) shortcut.init(in_ch, out_ch, 1, 0, rng);
  }

  struct Cache {
    std::vector<T> x, a1, c1, a2;
  };

  std::vector<T> forward(const std::vector<T>& x, int len, Cache* cache) const {
    std::vector<T> a1 = x;
    for (auto& v : a1) v = v > T(0) ? v : T(0);
    std::vector<T> c1 = conv1.forward(a1, len);
    std::vector<T> a2 = c1;
    for (auto& v : a2) v = v > T(0) ? v : T(0);
    std::vector<T> y = conv2.forward(a2, len);
    if (project) {
      std::vector<T> h = shortcut.forward(x, len);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += h[i];
    } else {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
    }
    if (cache) {
      cache->x = x;
      cache->a1 = std::move(a1);
      cache->c1 = std::move(c1);
      cache->a2 = std::move(a2);
    }
    return y;
  }

  std::vector<T> backward(const Cache& cache, const std::vector<T>& gy, int len) {
    std::vector<T> ga2 = conv2.backward(cache.a2, gy, len);
    for (std::size_t i = 0; i < ga2.size(); ++i)
      if (cache.c1[i] <= T(0)) ga2[i] = T(0);
    std::vector<T> ga1 = conv1.backward(cache.a1, ga2, len);
    for (std::size_t i = 0; i < ga1.size(); ++i)
      if (cache.x[i] <= T(0)) ga1[i] = T(0);

    if (project) {
      std::vector<T> gsc = shortcut.backward(cache.x, gy, len);
      for (std::size_t i = 0; i < ga1.size(); ++i) ga1[i] += gsc[i];
    } else {
      for (std::size_t i = 0; i < ga1.size(); ++i) ga1[i] += gy[i];
    }
    return ga1;
  }

  void sgd_step(T lr, T inv_batch) {
    conv1.sgd_step(lr, inv_batch);
    conv2.sgd_step(lr, inv_batch);
    if (project) shortcut.sgd_step(lr, inv_batch);
  }
};

// Stem convolution, residual blocks, final ReLU, global average pooling and
// one dense unit with sigmoid output.
template <typename T>
class ResNetCore {
 public:
  ResNetCore() = default;

  ResNetCore(int input_len, int blocks, int channels, std::uint64_t seed)
      : len_(input_len), channels_(channels) {
    if (input_len < 1) throw std::invalid_argument("ResNetCore: input_len < 1");
    std::mt19937_64 rng(seed);
    stem_.init(1, channels, 3, 1, rng);
    blocks_.resize(blocks);
    for (auto& block : blocks_) block.init(channels, channels, rng);
    dense_w_.resize(channels);
    std::normal_distribution<double> gauss(0.0,
                                           std::sqrt(2.0 / double(channels)));
    for (auto& v : dense_w_) v = static_cast<T>(gauss(rng));
    dense_b_ = T(0);
    dense_gw_.assign(channels, T(0));
  }

  int input_len() const { return len_; }
  int channels() const { return channels_; }

  T forward_logit(const std::vector<T>& x) const {
    return forward_impl(x, nullptr);
  }

  double forward_prob(const std::vector<T>& x) const {
    const double logit = static_cast<double>(forward_logit(x));
    return 1.0 / (1.0 + std::exp(-logit));
  }

  // Accumulates parameter gradients of the mean binary cross-entropy over
  // the batch; returns the mean loss. Call sgd_step (or zero_grads) after.
  double loss_and_grads(const std::vector<std::vector<T>>& X,
                        const std::vector<int>& y) {
    double total = 0;
    for (std::size_t s = 0; s < X.size(); ++s) {
      Caches caches;
      const T logit = forward_impl(X[s], &caches);
      const double l = static_cast<double>(logit);
      // softplus(l) - y*l, stable
      total += std::max(l, 0.0) - l * y[s] + std::log1p(std::exp(-std::abs(l)));
      const T dlogit =
          static_cast<T>(1.0 / (1.0 + std::exp(-l)) - static_cast<double>(y[s]));
      backward_impl(caches, dlogit);
    }
    return total / static_cast<double>(X.size());
  }

  void sgd_step(T lr, int batch) {
    const T inv = T(1) / static_cast<T>(batch);
    stem_.sgd_step(lr, inv);
    for (auto& block : blocks_) block.sgd_step(lr, inv);
    for (std::size_t c = 0; c < dense_w_.size(); ++c) {
      dense_w_[c] -= lr * dense_gw_[c] * inv;
      dense_gw_[c] = T(0);
    }
    dense_b_ -= lr * dense_gb_ * inv;
    dense_gb_ = T(0);
  }

  // flattened views over every trainable parameter and its gradient slot
  std::vector<T*> parameter_slots() {
    std::vector<T*> slots;
    auto add_conv = [&](Conv1D<T>& conv) {
      for (auto& v : conv.w) slots.push_back(&v);
      for (auto& v : conv.b) slots.push_back(&v);
    };
    add_conv(stem_);
    for (auto& block : blocks_) {
      add_conv(block.conv1);
      add_conv(block.conv2);
      if (block.project) add_conv(block.shortcut);
    }
    for (auto& v : dense_w_) slots.push_back(&v);
    slots.push_back(&dense_b_);
    return slots;
  }

  std::vector<T> gradient_values() const {
    std::vector<T> grads;
    auto add_conv = [&](const Conv1D<T>& conv) {
      grads.insert(grads.end(), conv.gw.begin(), conv.gw.end());
      grads.insert(grads.end(), conv.gb.begin(), conv.gb.end());
    };
    add_conv(stem_);
    for (const auto& block : blocks_) {
      add_conv(block.conv1);
      add_conv(block.conv2);
      if (block.project) add_conv(block.shortcut);
    }
    grads.insert(grads.end(), dense_gw_.begin(), dense_gw_.end());
    grads.push_back(dense_gb_);
    return grads;
  }

  void zero_grads() {
    auto zero_conv = [](Conv1D<T>& conv) {
      std::fill(conv.gw.begin(), conv.gw.end(), T(0));
      std::fill(conv.gb.begin(), conv.gb.end(), T(0));
    };
    zero_conv(stem_);
    for (auto& block : blocks_) {
      zero_conv(block.conv1);
      zero_conv(block.conv2);
      if (block.project) zero_conv(block.shortcut);
    }
    std::fill(dense_gw_.begin(), dense_gw_.end(), T(0));
    dense_gb_ = T(0);
  }

  // exposed for tests and serialization
  Conv1D<T>& stem() { return stem_; }
  std::vector<ResidualBlock<T>>& residual_blocks() { return blocks_; }
  std::vector<T>& dense_w() { return dense_w_; }
  T& dense_b() { return dense_b_; }
  const Conv1D<T>& stem() const { return stem_; }
  const std::vector<ResidualBlock<T>>& residual_blocks() const { return blocks_; }
  const std::vector<T>& dense_w() const { return dense_w_; }
  const T& dense_b() const { return dense_b_; }

 private:
  struct Caches {
    std::vector<T> input;
    std::vector<T> stem_out;
    std::vector<typename ResidualBlock<T>::Cache> blocks;
    std::vector<T> pre_pool;  // after final relu
    std::vector<T> pooled;    // [channels]
  };

  T forward_impl(const std::vector<T>& x, Caches* caches) const {
    if (static_cast<int>(x.size()) != len_)
      throw std::invalid_argument("ResNetCore: input length mismatch");
    std::vector<T> cur = stem_.forward(x, len_);
    if (caches) {
      caches->input = x;
      caches->stem_out = cur;
      caches->blocks.resize(blocks_.size());
    }
    for (std::size_t l = 0; l < blocks_.size(); ++l)
      cur = blocks_[l].forward(cur, len_, caches ? &caches->blocks[l] : nullptr);

    std::vector<T> activated = cur;
    for (auto& v : activated) v = v > T(0) ? v : T(0);

    std::vector<T> pooled(channels_);
    for (int c = 0; c < channels_; ++c) {
      T acc = T(0);
      const T* row = activated.data() + static_cast<std::size_t>(c) * len_;
      for (int i = 0; i < len_; ++i) acc += row[i];
      pooled[c] = acc / static_cast<T>(len_);
    }
    T logit = dense_b_;
    for (int c = 0; c < channels_; ++c) logit += dense_w_[c] * pooled[c];
    if (caches) {
      caches->pre_pool = std::move(activated);
      caches->pooled = std::move(pooled);
    }
    return logit;
  }

  void backward_impl(const Caches& caches, T dlogit) {
    for (int c = 0; c < channels_; ++c)
      dense_gw_[c] += dlogit * caches.pooled[c];
    dense_gb_ += dlogit;

    std::vector<T> gcur(static_cast<std::size_t>(channels_) * len_);
    for (int c = 0; c < channels_; ++c) {
      const T g = dlogit * dense_w_[c] / static_cast<T>(len_);
      T* row = gcur.data() + static_cast<std::size_t>(c) * len_;
      const T* pre = caches.pre_pool.data() + static_cast<std::size_t>(c) * len_;
      for (int i = 0; i < len_; ++i) row[i] = pre[i] > T(0) ? g : T(0);
    }

    for (std::size_t l = blocks_.size(); l-- > 0;)
      gcur = blocks_[l].backward(caches.blocks[l], gcur, len_);
    stem_.backward(caches.input, gcur, len_);
  }

  int len_ = 0;
  int channels_ = 0;
  Conv1D<T> stem_;
  std::vector<ResidualBlock<T>> blocks_;
  std::vector<T> dense_w_;
  T dense_b_ = T(0);
  std::vector<T> dense_gw_;
  T dense_gb_ = T(0);

  friend class ResNet;
};

// Training wrapper: reshapes feature vectors to 1-channel sequences (padded
// to length >= 3), standardizes inputs from training statistics and runs
// minibatch SGD on the binary cross-entropy.
class ResNet {
 public:
  static ResNet train(const std::vector<std::vector<double>>& X,
                      const std::vector<int>& y, const ResNetConfig& config);

  Prediction predict_one(const std::vector<double>& x) const;
  std::vector<Prediction> predict(const std::vector<std::vector<double>>& X) const;

  int feature_dim() const { return feature_dim_; }
  const ResNetConfig& config() const { return config_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  ResNetCore<float>& core() { return core_; }

  void save(std::ostream& out) const;
  static ResNet load(std::istream& in);

 private:
  std::vector<float> prepare(const std::vector<double>& x) const;

  ResNetConfig config_;
  int feature_dim_ = 0;
  int padded_len_ = 0;
  std::vector<double> mean_, scale_;
  ResNetCore<float> core_;
  std::vector<double> epoch_losses_;
};

}  // namespace vulnlearn
