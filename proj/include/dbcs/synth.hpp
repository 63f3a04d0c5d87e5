#pragma once

#include "dbcs/core.hpp"

#include <vector>

namespace dbcs {

enum class Generator { planted_factorization, labeled_mixture };

struct SyntheticSpec {
  Generator generator = Generator::planted_factorization;

  // planted_factorization: X = D*_1 ... D*_M Z* + noise, Z* s-sparse per column
  std::vector<Index> sizes;  // [n, k1, ..., kM]
  Index sparsity = 5;
  double noise = 0.0;
  Index num_samples = 100;

  // labeled_mixture: C Gaussian class means, samples scattered around them
  Index dimension = 0;
  int classes = 2;
  double mean_scale = 1.0;
  double class_noise = 0.1;
  Index samples_per_class = 50;
};

struct SynthResult {
  Matrix X;
  std::vector<int> labels;                 // labeled_mixture only
  std::vector<Matrix> true_dictionaries;   // planted only
  Matrix true_codes;                       // planted only
};

/// Deterministic synthetic data from rng. Planted dictionaries have unit-norm
/// columns; planted codes have exactly `sparsity` nonzeros per column at
/// uniformly drawn positions with standard-normal values.
SynthResult synth(const SyntheticSpec& spec, Rng& rng);

}  // namespace dbcs
