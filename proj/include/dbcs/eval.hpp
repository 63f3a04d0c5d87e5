#pragma once

#include "dbcs/core.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace dbcs {

/// Feature columns paired with integer class labels 0..C-1.
struct LabeledDataset {
  Matrix features;          // d x N, columns are samples
  std::vector<int> labels;  // length N
};

/// k-nearest-neighbour prediction under Euclidean distance. Distance ties
/// break toward the lower training-sample index, vote ties toward the lower
/// class index.
std::vector<int> knn_predict(const LabeledDataset& train,
                             const Matrix& test_features, int k = 1);

/// Fraction of exact matches.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

struct SensSpec {
  std::optional<double> sensitivity;  // empty when the class is absent from truth
  double specificity = 0.0;
};

/// One-vs-rest sensitivity TP/(TP+FN) and specificity TN/(TN+FP) for class cls.
SensSpec sens_spec(const std::vector<int>& pred, const std::vector<int>& truth,
                   int cls);

/// ||X_true - X_hat||_F^2 / ||X_true||_F^2.
double nmse(const Matrix& X_true, const Matrix& X_hat);

/// Per-class stratified split. Each class contributes ceil(fraction * count)
/// training samples, chosen by a seeded shuffle. Column order within each part
/// follows the original dataset order.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double train_fraction, Rng& rng);

/// Index-level stratified split over a label vector, same rules as split().
std::pair<std::vector<Index>, std::vector<Index>> split_indices(
    const std::vector<int>& labels, double train_fraction, Rng& rng);

}  // namespace dbcs
