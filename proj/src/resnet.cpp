#include "vulnlearn/resnet.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include "vulnlearn/serialize_util.hpp"

namespace vulnlearn {

std::vector<float> ResNet::prepare(const std::vector<double>& x) const {
  std::vector<float> seq(padded_len_, 0.0f);
  for (int d = 0; d < feature_dim_; ++d) {
    const double v = config_.standardize ? (x[d] - mean_[d]) / scale_[d] : x[d];
    seq[d] = static_cast<float>(v);
  }
  return seq;
}

ResNet ResNet::train(const std::vector<std::vector<double>>& X,
                     const std::vector<int>& y, const ResNetConfig& config) {
  if (X.size() != y.size() || X.size() < 2)
    throw std::invalid_argument("ResNet::train: need at least 2 samples");
  check_features_finite(X);
  check_binary_labels(y);
  if (config.blocks < 1 || config.channels < 1 || config.epochs < 1 ||
      config.batch_size < 1 || config.learning_rate <= 0)
    throw std::invalid_argument("ResNet::train: invalid configuration");

  ResNet net;
  net.config_ = config;
  net.feature_dim_ = static_cast<int>(X[0].size());
  net.padded_len_ = std::max(net.feature_dim_, 3);

  const std::size_t n = X.size();
  const std::size_t dim = X[0].size();
  net.mean_.assign(dim, 0.0);
  net.scale_.assign(dim, 1.0);
  if (config.standardize) {
    for (const auto& row : X)
      for (std::size_t d = 0; d < dim; ++d) net.mean_[d] += row[d];
    for (double& m : net.mean_) m /= static_cast<double>(n);
    std::vector<double> var(dim, 0.0);
    for (const auto& row : X)
      for (std::size_t d = 0; d < dim; ++d) {
        const double c = row[d] - net.mean_[d];
        var[d] += c * c;
      }
    for (std::size_t d = 0; d < dim; ++d)
      net.scale_[d] = var[d] > 0 ? std::sqrt(var[d] / static_cast<double>(n)) : 1.0;
  }

  net.core_ = ResNetCore<float>(net.padded_len_, config.blocks, config.channels,
                                config.seed);

  std::vector<std::vector<float>> seqs(n);
  for (std::size_t i = 0; i < n; ++i) seqs[i] = net.prepare(X[i]);

  std::mt19937_64 rng(config.seed ^ 0x5eedULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::vector<float>> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(seqs[order[i]]);
        labels.push_back(y[order[i]]);
      }
      const double loss = net.core_.loss_and_grads(batch, labels);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "ResNet::train: non-finite loss at epoch " + std::to_string(epoch) +
            "; lower the learning rate or standardize inputs");
      net.core_.sgd_step(static_cast<float>(config.learning_rate),
                         static_cast<int>(batch.size()));
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    net.epoch_losses_.push_back(epoch_loss / static_cast<double>(seen));
  }
  return net;
}

Prediction ResNet::predict_one(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != feature_dim_)
    throw std::invalid_argument("ResNet::predict: dimension mismatch");
  Prediction p;
  p.score = core_.forward_prob(prepare(x));
  p.label = p.score >= 0.5 ? 1 : 0;
  return p;
}

std::vector<Prediction> ResNet::predict(
    const std::vector<std::vector<double>>& X) const {
  std::vector<Prediction> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(predict_one(x));
  return out;
}

namespace {

void write_conv(std::ostream& out, const Conv1D<float>& conv) {
  io::write_i32(out, conv.in_ch);
  io::write_i32(out, conv.out_ch);
  io::write_i32(out, conv.ksize);
  io::write_i32(out, conv.pad);
  for (float v : conv.w) io::write_f32(out, v);
  for (float v : conv.b) io::write_f32(out, v);
}

void read_conv(std::istream& in, Conv1D<float>& conv) {
  conv.in_ch = io::read_i32(in);
  conv.out_ch = io::read_i32(in);
  conv.ksize = io::read_i32(in);
  conv.pad = io::read_i32(in);
  conv.w.resize(static_cast<std::size_t>(conv.out_ch) * conv.in_ch * conv.ksize);
  conv.b.resize(conv.out_ch);
  for (float& v : conv.w) v = io::read_f32(in);
  for (float& v : conv.b) v = io::read_f32(in);
  conv.gw.assign(conv.w.size(), 0.0f);
  conv.gb.assign(conv.b.size(), 0.0f);
}

}  // namespace

void ResNet::save(std::ostream& out) const {
  io::write_u32(out, 1);
  io::write_i32(out, feature_dim_);
  io::write_i32(out, padded_len_);
  io::write_i32(out, config_.blocks);
  io::write_i32(out, config_.channels);
  io::write_i32(out, config_.epochs);
  io::write_i32(out, config_.batch_size);
  io::write_f64(out, config_.learning_rate);
  io::write_u64(out, config_.seed);
  io::write_u32(out, config_.standardize ? 1 : 0);
  for (double v : mean_) io::write_f64(out, v);
  for (double v : scale_) io::write_f64(out, v);
  write_conv(out, core_.stem());
  for (const auto& block : core_.residual_blocks()) {
    write_conv(out, block.conv1);
    write_conv(out, block.conv2);
    io::write_u32(out, block.project ? 1 : 0);
    if (block.project) write_conv(out, block.shortcut);
  }
  for (float v : core_.dense_w()) io::write_f32(out, v);
  io::write_f32(out, core_.dense_b());
}

ResNet ResNet::load(std::istream& in) {
  if (io::read_u32(in) != 1)
    throw std::runtime_error("ResNet::load: unsupported format");
  ResNet net;
  net.feature_dim_ = io::read_i32(in);
  net.padded_len_ = io::read_i32(in);
  net.config_.blocks = io::read_i32(in);
  net.config_.channels = io::read_i32(in);
  net.config_.epochs = io::read_i32(in);
  net.config_.batch_size = io::read_i32(in);
  net.config_.learning_rate = io::read_f64(in);
  net.config_.seed = io::read_u64(in);
  net.config_.standardize = io::read_u32(in) == 1;
  net.mean_.resize(net.feature_dim_);
  net.scale_.resize(net.feature_dim_);
  for (double& v : net.mean_) v = io::read_f64(in);
  for (double& v : net.scale_) v = io::read_f64(in);

  net.core_ = ResNetCore<float>(net.padded_len_, net.config_.blocks,
                                net.config_.channels, net.config_.seed);
  read_conv(in, net.core_.stem());
  for (auto& block : net.core_.residual_blocks()) {
    read_conv(in, block.conv1);
    read_conv(in, block.conv2);
    block.project = io::read_u32(in) == 1;
    if (block.project) read_conv(in, block.shortcut);
  }
  for (float& v : net.core_.dense_w()) v = io::read_f32(in);
  net.core_.dense_b() = io::read_f32(in);
  return net;
}

}  // namespace vulnlearn
