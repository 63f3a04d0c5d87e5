#include "dbcs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dbcs {

std::vector<int> knn_predict(const LabeledDataset& train,
                             const Matrix& test_features, int k) {
  const Index n_train = train.features.cols();
  if (n_train == 0) {
    throw DimensionError("knn_predict: empty training set");
  }
  if (static_cast<Index>(train.labels.size()) != n_train) {
    throw DimensionError("knn_predict: labels do not match training features");
  }
  if (test_features.rows() != train.features.rows()) {
    throw DimensionError("knn_predict: feature dimension mismatch");
  }
  if (k < 1 || static_cast<Index>(k) > n_train) {
    throw ConfigError("knn_predict: need 1 <= k <= training size");
  }

  std::vector<int> pred(static_cast<std::size_t>(test_features.cols()));
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n_train));
  for (Index t = 0; t < test_features.cols(); ++t) {
    for (Index i = 0; i < n_train; ++i) {
      dist[static_cast<std::size_t>(i)] = {
          (train.features.col(i) - test_features.col(t)).squaredNorm(), i};
    }
    // Ties in distance break toward the lower training index.
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::map<int, int> votes;
    for (int i = 0; i < k; ++i) {
      ++votes[train.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)]];
    }
    int best_label = -1;
    int best_count = 0;
    for (const auto& [label, count] : votes) {  // ascending label order
      if (count > best_count) {
        best_label = label;
        best_count = count;
      }
    }
    pred[static_cast<std::size_t>(t)] = best_label;
  }
  return pred;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw DimensionError("accuracy: length mismatch");
  }
  if (pred.empty()) {
    throw DimensionError("accuracy: empty vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

SensSpec sens_spec(const std::vector<int>& pred, const std::vector<int>& truth,
                   int cls) {
  if (pred.size() != truth.size()) {
    throw DimensionError("sens_spec: length mismatch");
  }
  long tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool truth_pos = truth[i] == cls;
    bool pred_pos = pred[i] == cls;
    if (truth_pos && pred_pos) ++tp;
    else if (truth_pos) ++fn;
    else if (pred_pos) ++fp;
    else ++tn;
  }
  SensSpec result;
  if (tp + fn > 0) {
    result.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  result.specificity = (tn + fp > 0)
                           ? static_cast<double>(tn) / static_cast<double>(tn + fp)
                           : 1.0;
  return result;
}

double nmse(const Matrix& X_true, const Matrix& X_hat) {
  if (X_true.rows() != X_hat.rows() || X_true.cols() != X_hat.cols()) {
    throw DimensionError("nmse: shape mismatch");
  }
  double denom = X_true.squaredNorm();
  if (denom == 0.0) {
    throw ConfigError("nmse: X_true is zero");
  }
  return (X_true - X_hat).squaredNorm() / denom;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(
    const std::vector<int>& labels, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: fraction must be in (0, 1)");
  }
  int num_classes = 0;
  for (int l : labels) {
    if (l < 0) throw ConfigError("split: negative label");
    num_classes = std::max(num_classes, l + 1);
  }
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }
  std::vector<Index> train_idx, test_idx;
  for (auto& members : by_class) {
    if (members.size() < 2) {
      throw ConfigError("split: every class needs at least 2 samples");
    }
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
      std::size_t j = i + static_cast<std::size_t>(
                              rng.next_u64() % static_cast<std::uint64_t>(members.size() - i));
      std::swap(members[i], members[j]);
    }
    auto take = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(members.size())));
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + take);
    test_idx.insert(test_idx.end(), members.begin() + take, members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {std::move(train_idx), std::move(test_idx)};
}

namespace {

LabeledDataset select_columns(const LabeledDataset& data,
                              const std::vector<Index>& idx) {
  LabeledDataset out;
  out.features.resize(data.features.rows(), static_cast<Index>(idx.size()));
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.col(static_cast<Index>(i)) = data.features.col(idx[i]);
    out.labels.push_back(data.labels[static_cast<std::size_t>(idx[i])]);
  }
  return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double train_fraction, Rng& rng) {
  if (static_cast<Index>(data.labels.size()) != data.features.cols()) {
    throw DimensionError("split: labels do not match features");
  }
  auto [train_idx, test_idx] = split_indices(data.labels, train_fraction, rng);
  return {select_columns(data, train_idx), select_columns(data, test_idx)};
}

}  // namespace dbcs
