#include "dbcs/synth.hpp"

#include <algorithm>

namespace dbcs {

SynthResult synth(const SyntheticSpec& spec, Rng& rng) {
  SynthResult result;
  switch (spec.generator) {
    case Generator::planted_factorization: {
      if (spec.sizes.size() < 2) {
        throw ConfigError("synth: planted sizes need at least [n, k1]");
      }
      for (Index s : spec.sizes) {
        if (s < 1) throw ConfigError("synth: sizes must be positive");
      }
      if (spec.sparsity < 1 || spec.sparsity > spec.sizes.back()) {
        throw ConfigError("synth: sparsity must be in [1, kM]");
      }
      if (spec.noise < 0.0) throw ConfigError("synth: noise must be nonnegative");
      if (spec.num_samples < 1) {
        throw ConfigError("synth: num_samples must be >= 1");
      }

      for (std::size_t i = 0; i + 1 < spec.sizes.size(); ++i) {
        Matrix d = gaussian_matrix(spec.sizes[i], spec.sizes[i + 1], rng);
        normalize_columns(d, rng);
        result.true_dictionaries.push_back(std::move(d));
      }

      const Index km = spec.sizes.back();
      result.true_codes = Matrix::Zero(km, spec.num_samples);
      std::vector<Index> positions(static_cast<std::size_t>(km));
      for (Index c = 0; c < spec.num_samples; ++c) {
        for (Index i = 0; i < km; ++i) positions[static_cast<std::size_t>(i)] = i;
        for (Index i = 0; i < spec.sparsity; ++i) {
          Index j = i + static_cast<Index>(
                            rng.next_u64() % static_cast<std::uint64_t>(km - i));
          std::swap(positions[static_cast<std::size_t>(i)],
                    positions[static_cast<std::size_t>(j)]);
        }
        for (Index i = 0; i < spec.sparsity; ++i) {
          result.true_codes(positions[static_cast<std::size_t>(i)], c) =
              rng.next_normal();
        }
      }

      result.X = result.true_codes;
      for (auto it = result.true_dictionaries.rbegin();
           it != result.true_dictionaries.rend(); ++it) {
        result.X = *it * result.X;
      }
      if (spec.noise > 0.0) {
        result.X += spec.noise * gaussian_matrix(result.X.rows(), result.X.cols(), rng);
      }
      break;
    }
    case Generator::labeled_mixture: {
      if (spec.dimension < 1) throw ConfigError("synth: mixture dimension must be >= 1");
      if (spec.classes < 2) throw ConfigError("synth: mixture needs at least 2 classes");
      if (spec.class_noise < 0.0) throw ConfigError("synth: noise must be nonnegative");
      if (spec.samples_per_class < 1) {
        throw ConfigError("synth: samples_per_class must be >= 1");
      }

      Matrix means = spec.mean_scale *
                     gaussian_matrix(spec.dimension, spec.classes, rng);
      result.X.resize(spec.dimension,
                      spec.samples_per_class * static_cast<Index>(spec.classes));
      Index col = 0;
      for (int c = 0; c < spec.classes; ++c) {
        for (Index s = 0; s < spec.samples_per_class; ++s, ++col) {
          result.X.col(col) = means.col(c);
          if (spec.class_noise > 0.0) {
            result.X.col(col) +=
                spec.class_noise * gaussian_matrix(spec.dimension, 1, rng);
          }
          result.labels.push_back(c);
        }
      }
      break;
    }
  }
  return result;
}

}  // namespace dbcs
