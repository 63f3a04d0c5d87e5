#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dbcs/eval.hpp"

#include <algorithm>
#include <array>

using namespace dbcs;

namespace {

LabeledDataset make_dataset(std::initializer_list<std::pair<std::array<double, 2>, int>> pts) {
  LabeledDataset d;
  d.features.resize(2, static_cast<Index>(pts.size()));
  Index c = 0;
  for (const auto& [xy, label] : pts) {
    d.features(0, c) = xy[0];
    d.features(1, c) = xy[1];
    d.labels.push_back(label);
    ++c;
  }
  return d;
}

}  // namespace

TEST_CASE("knn_predict") {
  SUBCASE("exact training point wins at k=1") {
    auto train = make_dataset({{{0, 0}, 0}, {{5, 5}, 1}, {{9, 1}, 2}});
    Matrix q(2, 1);
    q << 5, 5;
    CHECK(knn_predict(train, q) == std::vector<int>{1});
  }

  SUBCASE("nearest neighbour geometry") {
    auto train = make_dataset({{{0, 0}, 0}, {{10, 10}, 1}});
    Matrix q(2, 1);
    q << 1, 1;
    CHECK(knn_predict(train, q, 1) == std::vector<int>{0});
  }

  SUBCASE("equidistant 3-point vote goes to the majority") {
    // all three training points at distance 1 from the origin query
    auto train = make_dataset({{{1, 0}, 0}, {{0, 1}, 1}, {{-1, 0}, 1}});
    Matrix q = Matrix::Zero(2, 1);
    CHECK(knn_predict(train, q, 3) == std::vector<int>{1});
  }

  SUBCASE("vote ties break toward the lower class index") {
    auto train = make_dataset({{{1, 0}, 2}, {{0, 1}, 1}});
    Matrix q = Matrix::Zero(2, 1);
    CHECK(knn_predict(train, q, 2) == std::vector<int>{1});
  }

  SUBCASE("distance ties break toward the lower training index") {
    auto train = make_dataset({{{1, 0}, 3}, {{-1, 0}, 0}});
    Matrix q = Matrix::Zero(2, 1);
    CHECK(knn_predict(train, q, 1) == std::vector<int>{3});
  }

  SUBCASE("errors") {
    auto train = make_dataset({{{1, 0}, 0}});
    Matrix q(3, 1);
    q << 0, 0, 0;
    CHECK_THROWS_AS(knn_predict(train, q), DimensionError);
    CHECK_THROWS_AS(knn_predict(LabeledDataset{}, Matrix::Zero(2, 1)),
                    DimensionError);
    Matrix ok = Matrix::Zero(2, 1);
    CHECK_THROWS_AS(knn_predict(train, ok, 2), ConfigError);
  }

  SUBCASE("k=1 on the training set reproduces the labels") {
    Rng rng(5);
    LabeledDataset train;
    train.features = gaussian_matrix(4, 30, rng);
    for (int i = 0; i < 30; ++i) train.labels.push_back(i % 3);
    CHECK(knn_predict(train, train.features, 1) == train.labels);
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(accuracy({1, 1, 1}, {0, 0, 0}) == 0.0);
  CHECK(accuracy({1, 0, 1, 1}, {1, 0, 1, 0}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), DimensionError);
}

TEST_CASE("sens_spec") {
  SUBCASE("perfect prediction") {
    std::vector<int> v{0, 1, 2, 0, 1, 2};
    for (int c = 0; c < 3; ++c) {
      auto ss = sens_spec(v, v, c);
      CHECK(*ss.sensitivity == 1.0);
      CHECK(ss.specificity == 1.0);
    }
  }

  SUBCASE("predictor that never outputs the class") {
    std::vector<int> truth{0, 0, 1, 1};
    std::vector<int> pred{1, 1, 1, 1};
    auto ss = sens_spec(pred, truth, 0);
    CHECK(*ss.sensitivity == 0.0);
    CHECK(ss.specificity == 1.0);
  }

  SUBCASE("hand-counted confusion matrix") {
    // truth [c,c,x,x], pred [c,x,x,c] with c=0, x=1
    std::vector<int> truth{0, 0, 1, 1};
    std::vector<int> pred{0, 1, 1, 0};
    auto ss = sens_spec(pred, truth, 0);
    CHECK(*ss.sensitivity == doctest::Approx(0.5));
    CHECK(ss.specificity == doctest::Approx(0.5));
  }

  SUBCASE("class absent from truth has undefined sensitivity") {
    auto ss = sens_spec({0, 1}, {0, 1}, 7);
    CHECK(!ss.sensitivity.has_value());
    CHECK(ss.specificity == 1.0);
  }

  SUBCASE("matches a brute-force confusion-matrix oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<int> truth, pred;
      int len = 5 + static_cast<int>(rng.next_u64() % 40);
      for (int i = 0; i < len; ++i) {
        truth.push_back(static_cast<int>(rng.next_u64() % 4));
        pred.push_back(static_cast<int>(rng.next_u64() % 4));
      }
      for (int c = 0; c < 4; ++c) {
        int tp = 0, fn = 0, fp = 0, tn = 0;
        for (int i = 0; i < len; ++i) {
          if (truth[static_cast<std::size_t>(i)] == c) {
            (pred[static_cast<std::size_t>(i)] == c ? tp : fn)++;
          } else {
            (pred[static_cast<std::size_t>(i)] == c ? fp : tn)++;
          }
        }
        auto ss = sens_spec(pred, truth, c);
        if (tp + fn == 0) {
          CHECK(!ss.sensitivity.has_value());
        } else {
          CHECK(*ss.sensitivity == static_cast<double>(tp) / (tp + fn));
        }
        CHECK(ss.specificity == static_cast<double>(tn) / (tn + fp));
      }
    }
  }
}

TEST_CASE("accuracy equals macro recall on a balanced set") {
  std::vector<int> truth{0, 0, 1, 1, 2, 2};
  std::vector<int> pred{0, 1, 1, 1, 2, 0};
  double macro = 0.0;
  for (int c = 0; c < 3; ++c) macro += *sens_spec(pred, truth, c).sensitivity;
  macro /= 3.0;
  CHECK(accuracy(pred, truth) == doctest::Approx(macro));
}

TEST_CASE("nmse") {
  Rng rng(8);
  Matrix x = gaussian_matrix(5, 5, rng);
  CHECK(nmse(x, x) == 0.0);
  CHECK(nmse(x, Matrix::Zero(5, 5)) == doctest::Approx(1.0));
  CHECK(nmse(x, 2.0 * x) == doctest::Approx(1.0));
  CHECK_THROWS_AS(nmse(Matrix::Zero(2, 2), x.topLeftCorner(2, 2)), ConfigError);
  CHECK_THROWS_AS(nmse(x, x.topLeftCorner(2, 2)), DimensionError);
}

TEST_CASE("split") {
  Rng rng(3);
  LabeledDataset data;
  data.features = gaussian_matrix(3, 20, rng);
  for (int i = 0; i < 20; ++i) data.labels.push_back(i < 10 ? 0 : 1);

  SUBCASE("half split gives 5/5 per class") {
    Rng r(1);
    auto [train, test] = split(data, 0.5, r);
    CHECK(train.labels.size() == 10);
    CHECK(test.labels.size() == 10);
    CHECK(std::count(train.labels.begin(), train.labels.end(), 0) == 5);
    CHECK(std::count(test.labels.begin(), test.labels.end(), 1) == 5);
  }

  SUBCASE("deterministic from the seed") {
    Rng a(7), b(7);
    auto [ta, sa] = split_indices(data.labels, 0.3, a);
    auto [tb, sb] = split_indices(data.labels, 0.3, b);
    CHECK(ta == tb);
    CHECK(sa == sb);
  }

  SUBCASE("ceiling rounding") {
    std::vector<int> labels(100, 0);
    for (int i = 0; i < 100; ++i) labels.push_back(1);
    Rng r(2);
    auto [train, test] = split_indices(labels, 0.1, r);
    CHECK(train.size() == 20);  // 10 per class
    CHECK(test.size() == 180);
  }

  SUBCASE("per-class counts are preserved") {
    Rng r(9);
    auto [train, test] = split_indices(data.labels, 0.4, r);
    for (int c = 0; c < 2; ++c) {
      long total = 0;
      for (Index i : train)
        total += data.labels[static_cast<std::size_t>(i)] == c;
      for (Index i : test)
        total += data.labels[static_cast<std::size_t>(i)] == c;
      CHECK(total == 10);
    }
  }

  SUBCASE("singleton class rejected") {
    std::vector<int> labels{0, 0, 1};
    Rng r(1);
    CHECK_THROWS_AS(split_indices(labels, 0.5, r), ConfigError);
  }
}
