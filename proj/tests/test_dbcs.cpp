#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dbcs/dbcs.hpp"
#include "dbcs/synth.hpp"

#include <cstring>
#include <filesystem>

using namespace dbcs;

namespace {

MeasurementOperator identity_op(Index n) {
  return build_operator(OperatorKind::identity, n, n, 0);
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("objective") {
  SUBCASE("zero code gives ||Y||_F^2") {
    Rng rng(1);
    Matrix y = gaussian_matrix(4, 6, rng);
    Matrix d = gaussian_matrix(4, 3, rng);
    CHECK(objective({d}, Matrix::Zero(3, 6), y, identity_op(4), 0.7) ==
          doctest::Approx(y.squaredNorm()));
  }

  SUBCASE("hand-evaluated scalar") {
    Matrix y(1, 1), d(1, 1), z(1, 1);
    y << 3;
    d << 1;
    z << 2;
    CHECK(objective({d}, z, y, identity_op(1), 1.0) == doctest::Approx(3.0));
  }

  SUBCASE("perfect planted fit with lambda 0 is 0") {
    SyntheticSpec spec;
    spec.sizes = {12, 8, 6};
    spec.sparsity = 2;
    spec.num_samples = 10;
    Rng rng(4);
    auto data = synth(spec, rng);
    CHECK(objective(data.true_dictionaries, data.true_codes, data.X,
                    identity_op(12), 0.0) < 1e-10);
  }
}

TEST_CASE("dbcs_fit") {
  SolverOptions opts;

  SUBCASE("huge lambda zeroes the code and the reconstruction") {
    Rng gen(10);
    Matrix y = gaussian_matrix(8, 12, gen);
    auto op = identity_op(8);
    Rng rng(11);
    auto model = dbcs_fit(y, op, LayerSpec{{8, 6}}, 1e6, 5, opts, rng);
    CHECK(model.codes.cwiseAbs().maxCoeff() == 0.0);
    CHECK(reconstruct(model).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("same seed and config is bit-identical") {
    Rng gen(20);
    Matrix y = gaussian_matrix(10, 15, gen);
    auto op = build_operator(OperatorKind::dense_gaussian, 10, 16, 3);
    Matrix x = gaussian_matrix(16, 15, gen);
    Matrix meas = op.apply(x);
    Rng a(21), b(21);
    auto ma = dbcs_fit(meas, op, LayerSpec{{16, 12, 8}}, 0.05, 4, opts, a);
    auto mb = dbcs_fit(meas, op, LayerSpec{{16, 12, 8}}, 0.05, 4, opts, b);
    CHECK(bitwise_equal(ma.codes, mb.codes));
    for (std::size_t i = 0; i < ma.dictionaries.size(); ++i) {
      CHECK(bitwise_equal(ma.dictionaries[i], mb.dictionaries[i]));
    }
    CHECK(ma.objective_trace == mb.objective_trace);
  }

  SUBCASE("planted noiseless instance with identity operator fits well") {
    SyntheticSpec spec;
    spec.sizes = {32, 24, 16};
    spec.sparsity = 3;
    spec.num_samples = 200;
    Rng data_rng(30);
    auto data = synth(spec, data_rng);
    auto op = identity_op(32);
    Rng fit_rng(31);
    SolverOptions deep = opts;
    deep.max_iters = 300;
    double lambda = 1e-4 * op.adjoint(data.X).cwiseAbs().maxCoeff();
    auto model =
        dbcs_fit(data.X, op, LayerSpec{{32, 24, 16}}, lambda, 30, deep, fit_rng);
    CHECK(model.objective_trace.back() <= 0.01 * model.objective_trace.front());
  }

  SUBCASE("trace is non-increasing and columns end unit-norm") {
    Rng gen(40);
    auto op = build_operator(OperatorKind::dense_gaussian, 8, 20, 7);
    Matrix x = gaussian_matrix(20, 30, gen);
    Matrix y = op.apply(x);
    Rng fit_rng(41);
    auto model = dbcs_fit(y, op, LayerSpec{{20, 14, 10}}, 0.1, 8, opts, fit_rng);
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
      CHECK(model.objective_trace[i] <=
            model.objective_trace[i - 1] * (1.0 + 1e-9));
    }
    for (const Matrix& d : model.dictionaries) {
      for (Index c = 0; c < d.cols(); ++c) {
        CHECK(std::abs(d.col(c).norm() - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("normalization with compensation preserves the product") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    std::vector<Matrix> dicts = {5.0 * gaussian_matrix(10, 8, rng),
                                 0.2 * gaussian_matrix(8, 6, rng)};
    Matrix z = gaussian_matrix(6, 7, rng);
    Matrix before = dicts[0] * dicts[1] * z;

    for (std::size_t i = 0; i < dicts.size(); ++i) {
      Vector scales = normalize_columns(dicts[i], rng);
      Matrix& downstream = (i + 1 < dicts.size()) ? dicts[i + 1] : z;
      for (Index c = 0; c < scales.size(); ++c) downstream.row(c) *= scales[c];
    }
    Matrix after = dicts[0] * dicts[1] * z;
    CHECK((after - before).norm() <= 1e-10 * before.norm());
  }
}

TEST_CASE("reconstruct") {
  SUBCASE("zero code gives the zero matrix") {
    DbcsModel model;
    model.dictionaries = {Matrix::Identity(3, 3)};
    model.codes = Matrix::Zero(3, 4);
    CHECK(reconstruct(model).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("identity dictionary returns the code") {
    Rng rng(6);
    DbcsModel model;
    model.dictionaries = {Matrix::Identity(4, 4)};
    model.codes = gaussian_matrix(4, 5, rng);
    CHECK(reconstruct(model) == model.codes);
  }
}

TEST_CASE("encode") {
  Rng gen(60);
  auto op = build_operator(OperatorKind::dense_gaussian, 10, 20, 9);
  Matrix x = gaussian_matrix(20, 25, gen);
  Matrix y = op.apply(x);
  SolverOptions opts;
  Rng fit_rng(61);
  auto model = dbcs_fit(y, op, LayerSpec{{20, 14, 10}}, 0.1, 6, opts, fit_rng);

  SUBCASE("zero measurements give a zero code") {
    Matrix z = encode(op, model.dictionaries, Matrix::Zero(10, 3), 0.1, opts);
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("batch equals per-column, bitwise") {
    Matrix batch = encode(op, model.dictionaries, y.leftCols(5), 0.1, opts);
    for (Index c = 0; c < 5; ++c) {
      Matrix single = encode(op, model.dictionaries, y.col(c), 0.1, opts);
      CHECK(bitwise_equal(batch.col(c), single));
    }
  }

  SUBCASE("column permutation equivariance") {
    Matrix cols = y.leftCols(4);
    Matrix permuted(cols.rows(), 4);
    std::vector<Index> perm{2, 0, 3, 1};
    for (Index c = 0; c < 4; ++c) permuted.col(c) = cols.col(perm[static_cast<std::size_t>(c)]);
    Matrix z_plain = encode(op, model.dictionaries, cols, 0.1, opts);
    Matrix z_perm = encode(op, model.dictionaries, permuted, 0.1, opts);
    for (Index c = 0; c < 4; ++c) {
      CHECK(bitwise_equal(z_perm.col(c), z_plain.col(perm[static_cast<std::size_t>(c)])));
    }
  }

  SUBCASE("re-encoding a training column is at least as good as its training code") {
    SolverOptions tight;
    tight.max_iters = 5000;
    tight.tol = 1e-14;
    Rng r1(62);
    auto tight_model = dbcs_fit(y, op, LayerSpec{{20, 12}}, 0.2, 10, tight, r1);
    Matrix g = op.materialize() * dictionary_product(tight_model.dictionaries);
    for (Index c = 0; c < 3; ++c) {
      Matrix z_new = encode(op, tight_model.dictionaries, y.col(c), 0.2, tight);
      double train_obj = (y.col(c) - g * tight_model.codes.col(c)).squaredNorm() +
                         0.2 * tight_model.codes.col(c).cwiseAbs().sum();
      double new_obj = (y.col(c) - g * z_new).squaredNorm() +
                       0.2 * z_new.cwiseAbs().sum();
      CHECK(new_obj <= train_obj + 1e-8);
    }
  }
}

TEST_CASE("bcs_fit") {
  SolverOptions opts;
  Rng gen(70);
  auto op = build_operator(OperatorKind::dense_gaussian, 12, 24, 13);
  Matrix x = gaussian_matrix(24, 40, gen);
  Matrix y = op.apply(x);

  SUBCASE("trace is non-increasing") {
    Rng rng(71);
    auto fit = bcs_fit(y, op, 16, 0.1, 0.5, 8, opts, rng);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) {
      CHECK(fit.trace[i] <= fit.trace[i - 1] * (1.0 + 1e-9));
    }
  }

  SUBCASE("huge mu shrinks the dictionary monotonically") {
    const Matrix a = op.materialize();
    // track ||D||_F sweep by sweep with an explicit loop of single sweeps
    Rng stepper(73);
    Matrix d = gaussian_matrix(24, 16, stepper);
    normalize_columns(d, stepper);
    Matrix z = Matrix::Zero(16, y.cols());
    double prev_norm = d.norm();
    for (int sweep = 0; sweep < 5; ++sweep) {
      d = sandwich_lsq(a, z, y, d, opts, 1e6);
      LinearMap g = matrix_map(a * d);
      z = ista(g, y, 0.1, z, opts, stepper).Z;
      CHECK(d.norm() <= prev_norm + 1e-12);
      prev_norm = d.norm();
    }
  }

  SUBCASE("planted shallow instance fits well") {
    SyntheticSpec spec;
    spec.sizes = {24, 16};
    spec.sparsity = 3;
    spec.num_samples = 150;
    Rng data_rng(74);
    auto data = synth(spec, data_rng);
    Matrix meas = op.apply(data.X);
    Rng rng(75);
    SolverOptions shallow = opts;
    shallow.max_iters = 300;
    double lambda = 1e-3 * (op.materialize().transpose() * meas).cwiseAbs().maxCoeff();
    auto fit = bcs_fit(meas, op, 16, lambda, 1e-6, 40, shallow, rng);
    CHECK(fit.trace.back() <= 0.05 * fit.trace.front());
  }

  SUBCASE("mu=0 with identity operator matches the un-normalized single-layer trajectory") {
    auto id = identity_op(24);
    Rng rng_a(76);
    auto fit = bcs_fit(x, id, 16, 0.2, 0.0, 4, opts, rng_a);

    // replay the identical update rules by hand
    Rng rng_b(76);
    Matrix d = gaussian_matrix(24, 16, rng_b);
    normalize_columns(d, rng_b);
    Matrix z = Matrix::Zero(16, x.cols());
    const Matrix a = id.materialize();
    std::vector<double> trace{(x - a * d * z).squaredNorm() +
                              0.2 * z.cwiseAbs().sum()};
    for (int sweep = 0; sweep < 4; ++sweep) {
      d = sandwich_lsq(a, z, x, d, opts, 0.0);
      z = ista(matrix_map(a * d), x, 0.2, z, opts, rng_b).Z;
      double obj = (x - a * d * z).squaredNorm() + 0.2 * z.cwiseAbs().sum();
      double prev = trace.back();
      trace.push_back(obj);
      if (std::abs(prev - obj) < opts.tol * std::max(std::abs(prev), 1e-300)) break;
    }
    CHECK(bitwise_equal(fit.dictionary, d));
    CHECK(bitwise_equal(fit.codes, z));
    CHECK(fit.trace == trace);
  }
}

TEST_CASE("dl_fit is exactly dbcs_fit with the identity operator") {
  Rng gen(80);
  Matrix x = gaussian_matrix(10, 20, gen);
  SolverOptions opts;
  Rng a(81), b(81);
  auto wrapper = dl_fit(x, 6, 0.1, 5, opts, a);
  auto direct = dbcs_fit(x, identity_op(10), LayerSpec{{10, 6}}, 0.1, 5, opts, b);
  CHECK(bitwise_equal(wrapper.dictionary, direct.dictionaries[0]));
  CHECK(bitwise_equal(wrapper.codes, direct.codes));
  CHECK(wrapper.trace == direct.objective_trace);
}

TEST_CASE("dl_fit planted and full-rank oracles") {
  SolverOptions opts;

  SUBCASE("planted unit-norm factorization") {
    SyntheticSpec spec;
    spec.sizes = {16, 12};
    spec.sparsity = 2;
    spec.num_samples = 120;
    Rng data_rng(82);
    auto data = synth(spec, data_rng);
    Rng rng(83);
    double lambda = 1e-3 * data.X.cwiseAbs().maxCoeff();
    auto fit = dl_fit(data.X, 12, lambda, 40, opts, rng);
    CHECK(fit.trace.back() <= 0.01 * data.X.squaredNorm());
  }

  SUBCASE("square dictionary with lambda 0 reaches a near-exact fit") {
    Rng gen(84);
    Matrix x = gaussian_matrix(8, 30, gen);
    SolverOptions many;
    many.max_iters = 500;
    many.tol = 1e-14;
    Rng rng(85);
    auto fit = dl_fit(x, 8, 0.0, 100, many, rng);
    double resid = (x - fit.dictionary * fit.codes).norm() / x.norm();
    CHECK(resid <= 1e-3);
  }
}

TEST_CASE("a fitted deep model does not collapse into one normalized layer") {
  Rng gen(90);
  auto op = build_operator(OperatorKind::dense_gaussian, 10, 20, 17);
  Matrix x = gaussian_matrix(20, 30, gen);
  Matrix y = op.apply(x);
  SolverOptions opts;
  Rng rng(91);
  auto model = dbcs_fit(y, op, LayerSpec{{20, 14, 10}}, 0.1, 6, opts, rng);

  Matrix collapsed = dictionary_product(model.dictionaries);
  Matrix z = model.codes;
  double before = objective({collapsed}, z, y, op, model.lambda);

  Rng norm_rng(92);
  Vector scales = normalize_columns(collapsed, norm_rng);
  for (Index c = 0; c < scales.size(); ++c) z.row(c) *= scales[c];
  double after = objective({collapsed}, z, y, op, model.lambda);

  // unit-norm layers do not give a unit-norm product, so re-normalizing the
  // collapsed dictionary moves scale into the penalized Z and changes the
  // objective
  bool scales_already_unit = (scales.array() - 1.0).abs().maxCoeff() < 1e-9;
  CHECK(!scales_already_unit);
  CHECK(std::abs(after - before) > 1e-9);
}

TEST_CASE("model save/load round trip") {
  Rng gen(95);
  auto op = identity_op(6);
  Matrix y = gaussian_matrix(6, 8, gen);
  SolverOptions opts;
  Rng rng(96);
  auto model = dbcs_fit(y, op, LayerSpec{{6, 4}}, 0.1, 3, opts, rng);

  auto dir = (std::filesystem::temp_directory_path() / "dbcs_model_rt").string();
  save_model(model, dir);
  auto back = load_model(dir);
  CHECK(back.layer_spec.sizes == model.layer_spec.sizes);
  CHECK(back.lambda == model.lambda);
  CHECK(back.objective_trace == model.objective_trace);
  CHECK(bitwise_equal(back.codes, model.codes));
  CHECK(bitwise_equal(back.dictionaries[0], model.dictionaries[0]));
}
