#include "vulnlearn/random_forest.hpp"

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

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double gini(std::int64_t n0, std::int64_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0) return 0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int mtry(FeatureRule rule, int dim) {
  switch (rule) {
    case FeatureRule::Sqrt:
      return std::max(1, static_cast<int>(std::lround(std::sqrt(dim))));
    case FeatureRule::Log2:
      return std::max(1, static_cast<int>(std::lround(std::log2(dim))));
    case FeatureRule::All:
      return dim;
  }
  return dim;
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& y;
  const RfConfig& config;
  std::mt19937_64 rng;
  std::vector<RandomForest::Node>* nodes;
  std::vector<int> feature_pool;

  struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = -1;
  };

  Split best_split(const std::vector<int>& rows) {
    const int dim = static_cast<int>(X[0].size());
    const int k = mtry(config.features_per_split, dim);

    // sample k features without replacement (partial Fisher-Yates)
    feature_pool.resize(dim);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, dim - 1);
      std::swap(feature_pool[i], feature_pool[pick(rng)]);
    }

    std::int64_t total1 = 0;
    for (int r : rows) total1 += y[r];
    const std::int64_t total0 = static_cast<std::int64_t>(rows.size()) - total1;
    const double parent = gini(total0, total1);

    Split best;
    std::vector<std::pair<double, int>> values(rows.size());
    for (int fi = 0; fi < k; ++fi) {
      const int feature = feature_pool[fi];
      for (std::size_t i = 0; i < rows.size(); ++i)
        values[i] = {X[rows[i]][feature], y[rows[i]]};
      std::sort(values.begin(), values.end());

      std::int64_t left0 = 0, left1 = 0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (values[i].second == 1) ++left1;
        else ++left0;
        if (values[i].first == values[i + 1].first) continue;
        const std::int64_t right0 = total0 - left0, right1 = total1 - left1;
        const double nl = static_cast<double>(left0 + left1);
        const double nr = static_cast<double>(right0 + right1);
        const double n = nl + nr;
        const double gain = parent - (nl / n) * gini(left0, left1) -
                            (nr / n) * gini(right0, right1);
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = feature;
          best.threshold = (values[i].first + values[i + 1].first) / 2.0;
        }
      }
    }
    return best;
  }

  int build(const std::vector<int>& rows, int depth) {
    std::int64_t ones = 0;
    for (int r : rows) ones += y[r];
    const std::int64_t zeros = static_cast<std::int64_t>(rows.size()) - ones;

    auto make_leaf = [&]() {
      RandomForest::Node leaf;
      leaf.label = ones > zeros ? 1 : 0;
      nodes->push_back(leaf);
      return static_cast<int>(nodes->size()) - 1;
    };

    const bool pure = ones == 0 || zeros == 0;
    const bool too_small =
        static_cast<int>(rows.size()) < config.min_samples_split;
    const bool too_deep = config.max_depth >= 0 && depth >= config.max_depth;
    if (pure || too_small || too_deep) return make_leaf();

    Split split = best_split(rows);
    if (split.feature < 0) return make_leaf();  // all candidate features constant

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (X[r][split.feature] <= split.threshold) left_rows.push_back(r);
      else right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) return make_leaf();

    const int self = static_cast<int>(nodes->size());
    nodes->push_back({});
    (*nodes)[self].feature = split.feature;
    (*nodes)[self].threshold = split.threshold;
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    (*nodes)[self].left = left;
    (*nodes)[self].right = right;
    return self;
  }
};

}  // namespace

RandomForest RandomForest::train(const std::vector<std::vector<double>>& X,
                                 const std::vector<int>& y,
                                 const RfConfig& config) {
  if (X.size() != y.size() || X.size() < 2)
    throw std::invalid_argument("RandomForest::train: need at least 2 samples");
  check_features_finite(X);
  check_binary_labels(y);
  if (config.n_trees < 1)
    throw std::invalid_argument("RandomForest::train: n_trees must be >= 1");

  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1)
    throw std::invalid_argument(
        "RandomForest::train: training labels contain a single class; provide "
        "examples of both classes");

  // canonical row order: sort by (features, label)
  std::vector<int> order(X.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (X[a] != X[b]) return X[a] < X[b];
    return y[a] < y[b];
  });
  std::vector<std::vector<double>> Xs;
  std::vector<int> ys;
  Xs.reserve(X.size());
  for (int i : order) {
    Xs.push_back(X[i]);
    ys.push_back(y[i]);
  }

  RandomForest forest;
  forest.config_ = config;
  forest.feature_dim_ = static_cast<int>(X[0].size());
  forest.trees_.resize(config.n_trees);

  const int n = static_cast<int>(Xs.size());
  for (int t = 0; t < config.n_trees; ++t) {
    TreeBuilder builder{Xs, ys, config,
                        std::mt19937_64(splitmix64(config.seed +
                                                   static_cast<std::uint64_t>(t))),
                        &forest.trees_[t],
                        {}};
    std::vector<int> bootstrap(n);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < n; ++i) bootstrap[i] = pick(builder.rng);
    std::sort(bootstrap.begin(), bootstrap.end());
    builder.build(bootstrap, 0);
  }
  return forest;
}

Prediction RandomForest::predict_one(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != feature_dim_)
    throw std::invalid_argument("RandomForest::predict: dimension mismatch");
  int votes = 0;
  for (const auto& tree : trees_) {
    int node = 0;
    while (tree[node].feature >= 0)
      node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                           : tree[node].right;
    votes += tree[node].label;
  }
  Prediction p;
  p.score = static_cast<double>(votes) / static_cast<double>(trees_.size());
  p.label = p.score >= 0.5 ? 1 : 0;
  return p;
}

std::vector<Prediction> RandomForest::predict(
    const std::vector<std::vector<double>>& X) const {
  std::vector<Prediction> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(predict_one(x));
  return out;
}

void RandomForest::save(std::ostream& out) const {
  io::write_u32(out, 1);  // format version
  io::write_i32(out, feature_dim_);
  io::write_i32(out, config_.n_trees);
  io::write_i32(out, config_.max_depth);
  io::write_i32(out, config_.min_samples_split);
  io::write_i32(out, static_cast<int>(config_.features_per_split));
  io::write_u64(out, config_.seed);
  io::write_u64(out, trees_.size());
  for (const auto& tree : trees_) {
    io::write_u64(out, tree.size());
    for (const auto& node : tree) {
      io::write_i32(out, node.feature);
      io::write_f64(out, node.threshold);
      io::write_i32(out, node.left);
      io::write_i32(out, node.right);
      io::write_i32(out, node.label);
    }
  }
}

RandomForest RandomForest::load(std::istream& in) {
  if (io::read_u32(in) != 1)
    throw std::runtime_error("RandomForest::load: unsupported format");
  RandomForest forest;
  forest.feature_dim_ = io::read_i32(in);
  forest.config_.n_trees = io::read_i32(in);
  forest.config_.max_depth = io::read_i32(in);
  forest.config_.min_samples_split = io::read_i32(in);
  forest.config_.features_per_split = static_cast<FeatureRule>(io::read_i32(in));
  forest.config_.seed = io::read_u64(in);
  forest.trees_.resize(io::read_u64(in));
  for (auto& tree : forest.trees_) {
    tree.resize(io::read_u64(in));
    for (auto& node : tree) {
      node.feature = io::read_i32(in);
      node.threshold = io::read_f64(in);
      node.left = io::read_i32(in);
      node.right = io::read_i32(in);
      node.label = io::read_i32(in);
    }
  }
  return forest;
}

bool operator==(const RandomForest& a, const RandomForest& b) {
  if (a.feature_dim_ != b.feature_dim_ || a.trees_.size() != b.trees_.size())
    return false;
  for (std::size_t t = 0; t < a.trees_.size(); ++t) {
    if (a.trees_[t].size() != b.trees_[t].size()) return false;
    for (std::size_t n = 0; n < a.trees_[t].size(); ++n) {
      const auto& x = a.trees_[t][n];
      const auto& y = b.trees_[t][n];
      if (x.feature != y.feature || x.threshold != y.threshold ||
          x.left != y.left || x.right != y.right || x.label != y.label)
        return false;
    }
  }
  return true;
}

}  // namespace vulnlearn
