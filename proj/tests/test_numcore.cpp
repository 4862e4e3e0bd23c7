#include "doctest.h"

#include <filesystem>

#include "pttr/numcore.hpp"
#include "support.hpp"

using namespace pttr;
using namespace pttr::testing;

namespace {

MatrixD mat(Index r, Index c, std::initializer_list<double> v) {
  MatrixD m(r, c);
  Index i = 0;
  for (double x : v) m.data()[i++] = x;
  return m;
}

// Random values kept away from zero so relu/max kinks never sit within h.
MatrixD away_from_zero(Index r, Index c, RandomState& rng) {
  MatrixD m = random_matrix(r, c, rng, 0.1, 1.0);
  for (Index i = 0; i < m.size(); ++i) {
    if (rng.bernoulli(0.5)) m.data()[i] = -m.data()[i];
  }
  return m;
}

}  // namespace

TEST_CASE("matmul examples") {
  const MatrixD m = mat(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(matmul(TensorD(MatrixD::Identity(3, 3)), TensorD(m)).value() == m);
  const auto out = matmul(TensorD(mat(2, 2, {1, 2, 3, 4})), TensorD(mat(2, 1, {1, 1})));
  CHECK(out.value() == mat(2, 1, {3, 7}));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    matmul(TensorD::zeros(2, 3), TensorD::zeros(2, 3));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches finite differences") {
  RandomState rng(1);
  auto a = leaf(random_matrix(5, 4, rng));
  auto b = leaf(random_matrix(4, 3, rng));
  CHECK(gradient_error([&] { return sum(matmul(a, b)); }, {a, b}) < 1e-4);
  const MatrixD w = random_matrix(5, 3, rng);
  CHECK(gradient_error([&] { return project(matmul(a, b), w); }, {a, b}) < 1e-4);
}

TEST_CASE("transposed products and transpose gradients") {
  RandomState rng(2);
  auto a = leaf(random_matrix(4, 3, rng));
  auto b = leaf(random_matrix(5, 3, rng));
  const MatrixD expected = a.value() * b.value().transpose();
  CHECK((matmul_transposed(a, b).value() - expected).norm() < 1e-12);
  const MatrixD w = random_matrix(4, 5, rng);
  CHECK(gradient_error([&] { return project(matmul_transposed(a, b), w); }, {a, b}) < 1e-4);
  const MatrixD wt = random_matrix(3, 4, rng);
  CHECK(gradient_error([&] { return project(transpose(a), wt); }, {a}) < 1e-4);
}

TEST_CASE("softmax_rows examples") {
  const auto eq = softmax_rows(TensorD(MatrixD::Constant(1, 4, 2.5)));
  for (Index i = 0; i < 4; ++i) CHECK(eq(0, i) == doctest::Approx(0.25));
  const auto big = softmax_rows(TensorD(mat(1, 2, {1000, 0})));
  CHECK(big(0, 0) == 1.0);
  CHECK(big(0, 1) >= 0.0);
  CHECK(big(0, 1) < 1e-300);
  RandomState rng(3);
  const auto r = softmax_rows(TensorD(random_matrix(3, 5, rng, -5, 5)));
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(r.value().row(i).sum() - 1.0) < 1e-6);
    CHECK(r.value().row(i).minCoeff() >= 0.0);
  }
}

TEST_CASE("softmax_rows gradient") {
  RandomState rng(4);
  auto x = leaf(random_matrix(3, 5, rng, -2, 2));
  const MatrixD w = random_matrix(3, 5, rng);
  CHECK(gradient_error([&] { return project(softmax_rows(x), w); }, {x}) < 1e-4);
}

TEST_CASE("l2_normalize_rows examples") {
  const auto n = l2_normalize_rows(TensorD(mat(1, 2, {3, 4})));
  CHECK(n(0, 0) == doctest::Approx(0.6));
  CHECK(n(0, 1) == doctest::Approx(0.8));
  const auto z = l2_normalize_rows(TensorD(MatrixD::Zero(2, 3)), 1e-12);
  CHECK(z.value().isZero(0));
  RandomState rng(5);
  const auto r = l2_normalize_rows(TensorD(random_matrix(6, 4, rng)));
  for (Index i = 0; i < 6; ++i) CHECK(std::abs(r.value().row(i).norm() - 1.0) < 1e-6);
  CHECK_THROWS_AS(l2_normalize_rows(TensorD(mat(1, 2, {3, 4})), 0.0), ValidationError);
}

TEST_CASE("l2_normalize_rows gradient") {
  RandomState rng(6);
  auto x = leaf(random_matrix(4, 3, rng));
  const MatrixD w = random_matrix(4, 3, rng);
  CHECK(gradient_error([&] { return project(l2_normalize_rows(x), w); }, {x}) < 1e-4);
}

TEST_CASE("elementwise examples") {
  CHECK(relu(TensorD(mat(1, 3, {-1, 0, 2}))).value() == mat(1, 3, {0, 0, 2}));
  CHECK(sigmoid(TensorD::scalar(0.0)).item() == 0.5);
  const MatrixD single = mat(1, 3, {4, -2, 7});
  CHECK(max_over_axis(TensorD(single), 0).value() == single);
  CHECK(max_over_axis(TensorD(MatrixD(single.transpose())), 1).value() == single.transpose());
  CHECK(mean_over_axis(TensorD(mat(2, 2, {1, 2, 3, 4})), 0).value() == mat(1, 2, {2, 3}));
  CHECK(mean_over_axis(TensorD(mat(2, 2, {1, 2, 3, 4})), 1).value() == mat(2, 1, {1.5, 3.5}));
  CHECK(add(TensorD(mat(2, 2, {1, 2, 3, 4})), TensorD(mat(1, 2, {10, 20}))).value() == mat(2, 2, {11, 22, 13, 24}));
  CHECK(sub(TensorD(mat(2, 1, {1, 2})), TensorD::scalar(1.0)).value() == mat(2, 1, {0, 1}));
  CHECK(mul(TensorD(mat(1, 2, {2, 3})), TensorD(mat(2, 1, {1, 10}))).value() == mat(2, 2, {2, 3, 20, 30}));
  CHECK(concat_last_dim<double>({TensorD(mat(1, 1, {1})), TensorD(mat(1, 2, {2, 3}))}).value() == mat(1, 3, {1, 2, 3}));
  CHECK_THROWS_AS(add(TensorD::zeros(2, 3), TensorD::zeros(3, 3)), DimensionError);
  CHECK_THROWS_AS(concat_last_dim<double>({TensorD::zeros(2, 1), TensorD::zeros(3, 1)}), DimensionError);
}

TEST_CASE("elementwise gradients including broadcasting") {
  RandomState rng(7);
  auto a = leaf(away_from_zero(4, 3, rng));
  auto b = leaf(random_matrix(4, 3, rng));
  auto row = leaf(random_matrix(1, 3, rng));
  auto col = leaf(random_matrix(4, 1, rng));
  const MatrixD w = random_matrix(4, 3, rng);
  CHECK(gradient_error([&] { return project(relu(a), w); }, {a}) < 1e-4);
  CHECK(gradient_error([&] { return project(sigmoid(b), w); }, {b}) < 1e-4);
  CHECK(gradient_error([&] { return project(add(a, row), w); }, {a, row}) < 1e-4);
  CHECK(gradient_error([&] { return project(sub(col, b), w); }, {col, b}) < 1e-4);
  CHECK(gradient_error([&] { return project(mul(a, b), w); }, {a, b}) < 1e-4);
  CHECK(gradient_error([&] { return project(mul(row, col), w); }, {row, col}) < 1e-4);
  CHECK(gradient_error([&] { return project(affine(b, 2.5, -1.0), w); }, {b}) < 1e-4);
  const MatrixD wc = random_matrix(4, 7, rng);
  CHECK(gradient_error([&] { return project(concat_last_dim<double>({a, col, b}), wc); }, {a, col, b}) < 1e-4);
  const MatrixD ws = random_matrix(4, 2, rng);
  CHECK(gradient_error([&] { return project(slice_cols(b, 1, 2), ws); }, {b}) < 1e-4);
}

TEST_CASE("reduction gradients") {
  RandomState rng(8);
  auto x = leaf(random_matrix(5, 3, rng));
  const MatrixD wr = random_matrix(1, 3, rng);
  const MatrixD wc = random_matrix(5, 1, rng);
  CHECK(gradient_error([&] { return project(max_over_axis(x, 0), wr); }, {x}) < 1e-4);
  CHECK(gradient_error([&] { return project(max_over_axis(x, 1), wc); }, {x}) < 1e-4);
  CHECK(gradient_error([&] { return project(mean_over_axis(x, 0), wr); }, {x}) < 1e-4);
  CHECK(gradient_error([&] { return project(mean_over_axis(x, 1), wc); }, {x}) < 1e-4);
  CHECK(gradient_error([&] { return mean(x); }, {x}) < 1e-4);
}

TEST_CASE("gather_rows with repeats accumulates gradient") {
  RandomState rng(9);
  auto x = leaf(random_matrix(4, 2, rng));
  const std::vector<int> idx{2, 0, 2, 3, 2};
  const auto g = gather_rows(x, idx);
  CHECK(g.value().row(0) == x.value().row(2));
  CHECK(g.value().row(4) == x.value().row(2));
  const MatrixD w = random_matrix(5, 2, rng);
  CHECK(gradient_error([&] { return project(gather_rows(x, idx), w); }, {x}) < 1e-4);
  x.zero_grad();
  backward(sum(gather_rows(x, idx)));
  CHECK(x.grad()(2, 0) == 3.0);
  CHECK(x.grad()(1, 0) == 0.0);
}

TEST_CASE("segment_max against brute force") {
  RandomState rng(10);
  auto x = leaf(random_matrix(9, 3, rng));
  const std::vector<Index> offsets{0, 2, 3, 9};
  const auto out = segment_max(x, offsets);
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    for (Index c = 0; c < 3; ++c) {
      double best = -1e300;
      for (Index r = offsets[s]; r < offsets[s + 1]; ++r) best = std::max(best, x(r, c));
      CHECK(out(static_cast<Index>(s), c) == best);
    }
  }
  const MatrixD w = random_matrix(3, 3, rng);
  CHECK(gradient_error([&] { return project(segment_max(x, offsets), w); }, {x}) < 1e-4);
  CHECK_THROWS_AS(segment_max(x, {0, 4, 4, 9}), DimensionError);
  CHECK_THROWS_AS(group_max_rows(x, 2), DimensionError);
  CHECK(group_max_rows(x, 3).value() == segment_max(x, {0, 3, 6, 9}).value());
}

TEST_CASE("row_mix matches dense operator") {
  RandomState rng(11);
  RowMixer mixer;
  mixer.in_rows = 4;
  mixer.out_rows = 3;
  mixer.entries = {{0, 1, 0.5}, {0, 3, 0.25}, {2, 1, -1.0}, {2, 2, 2.0}};
  MatrixD dense = MatrixD::Zero(3, 4);
  for (const auto& e : mixer.entries) dense(e.dst, e.src) += e.weight;
  auto x = leaf(random_matrix(4, 2, rng));
  CHECK((row_mix(x, mixer).value() - dense * x.value()).norm() < 1e-14);
  const MatrixD w = random_matrix(3, 2, rng);
  CHECK(gradient_error([&] { return project(row_mix(x, mixer), w); }, {x}) < 1e-4);
}

TEST_CASE("im2col3x3 convolution matches direct convolution") {
  RandomState rng(12);
  const Index h = 5, w = 4, cin = 2, cout = 3;
  auto x = leaf(random_matrix(h * w, cin, rng));
  auto k = leaf(random_matrix(9 * cin, cout, rng));
  for (Index stride : {1, 2}) {
    const auto out = matmul(im2col3x3(x, h, w, stride), k);
    const Index oh = (h - 1) / stride + 1, ow = (w - 1) / stride + 1;
    REQUIRE(out.rows() == oh * ow);
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        for (Index o = 0; o < cout; ++o) {
          double acc = 0;
          for (Index dy = -1; dy <= 1; ++dy) {
            for (Index dx = -1; dx <= 1; ++dx) {
              const Index iy = oy * stride + dy, ix = ox * stride + dx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              const Index kk = (dy + 1) * 3 + (dx + 1);
              for (Index c = 0; c < cin; ++c) acc += x(iy * w + ix, c) * k(kk * cin + c, o);
            }
          }
          CHECK(out(oy * ow + ox, o) == doctest::Approx(acc).epsilon(1e-12));
        }
      }
    }
    const MatrixD pw = random_matrix(oh * ow, cout, rng);
    CHECK(gradient_error([&] { return project(matmul(im2col3x3(x, h, w, stride), k), pw); }, {x, k}) < 1e-4);
  }
}

TEST_CASE("linear examples and gradient") {
  RandomState rng(13);
  const MatrixD x = random_matrix(4, 3, rng);
  CHECK(linear(TensorD(x), TensorD(MatrixD::Identity(3, 3)), TensorD::zeros(1, 3)).value() == x);
  const MatrixD c = mat(1, 2, {1.5, -2});
  const auto out = linear(TensorD::zeros(3, 4), TensorD(random_matrix(4, 2, rng)), TensorD(c));
  for (Index r = 0; r < 3; ++r) CHECK(out.value().row(r) == c);
  auto xi = leaf(x);
  auto w = leaf(random_matrix(3, 2, rng));
  auto b = leaf(random_matrix(1, 2, rng));
  CHECK(gradient_error([&] { return sum(linear(xi, w, b)); }, {xi, w, b}) < 1e-4);
  CHECK_THROWS_AS(linear(TensorD::zeros(2, 4), TensorD::zeros(3, 2)), DimensionError);
}

TEST_CASE("bce_loss examples") {
  CHECK(bce_loss(TensorD::scalar(0.0), mat(1, 1, {1})).item() == doctest::Approx(std::log(2.0)));
  const double v = bce_loss(TensorD::scalar(20.0), mat(1, 1, {1})).item();
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(2.06e-9).epsilon(0.01));
  const double far = bce_loss(TensorD::scalar(-800.0), mat(1, 1, {1})).item();
  CHECK(far == doctest::Approx(800.0));
  CHECK_THROWS_AS(bce_loss(TensorD::scalar(0.0), mat(1, 1, {0.5})), ValidationError);
}

TEST_CASE("bce_loss matches naive formula and finite differences") {
  RandomState rng(14);
  auto z = leaf(random_matrix(6, 1, rng, -3, 3));
  MatrixD t(6, 1);
  for (Index i = 0; i < 6; ++i) t(i, 0) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  double naive = 0;
  for (Index i = 0; i < 6; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z(i, 0)));
    naive -= t(i, 0) * std::log(p) + (1 - t(i, 0)) * std::log(1 - p);
  }
  CHECK(bce_loss(z, t).item() == doctest::Approx(naive / 6).epsilon(1e-12));
  CHECK(gradient_error([&] { return bce_loss(z, t); }, {z}) < 1e-4);
}

TEST_CASE("mse_loss examples, mask and gradient") {
  RandomState rng(15);
  const MatrixD t = random_matrix(3, 4, rng);
  CHECK(mse_loss(TensorD(t), t).item() == 0.0);
  CHECK(mse_loss(TensorD(MatrixD(t.array() + 1.0)), t).item() == doctest::Approx(1.0));
  const std::optional<MatrixD> mask = mat(3, 1, {1, 0, 1});
  MatrixD p = t;
  p.row(1).array() += 100.0;
  p.row(2).array() += 2.0;
  CHECK(mse_loss(TensorD(p), t, mask).item() == doctest::Approx(2.0));
  CHECK(mse_loss(TensorD(p), t, std::optional<MatrixD>(MatrixD::Zero(3, 1))).item() == 0.0);
  CHECK_THROWS_AS(mse_loss(TensorD(p), t, std::optional<MatrixD>(mat(3, 1, {1, 2, 0}))), ValidationError);
  auto x = leaf(random_matrix(3, 4, rng));
  CHECK(gradient_error([&] { return mse_loss(x, t, mask); }, {x}) < 1e-4);
}

TEST_CASE("adam examples") {
  SUBCASE("zero gradients leave parameters unchanged") {
    ParameterList<double> params;
    params.add(Parameter<double>("p", mat(1, 2, {0.3, -0.7})));
    params[0].tensor().mutable_grad() = MatrixD::Zero(1, 2);
    sgd_adam_step(params, 1e-3, {0.9, 0.999}, 1e-8);
    CHECK(params[0].tensor().value() == mat(1, 2, {0.3, -0.7}));
  }
  SUBCASE("first step moves by about lr") {
    ParameterList<double> params;
    params.add(Parameter<double>("p", mat(1, 1, {2.0})));
    params[0].tensor().mutable_grad() = mat(1, 1, {1.0});
    sgd_adam_step(params, 1e-3, {0.9, 0.999}, 1e-8);
    // m_hat = 1, v_hat = 1
    CHECK(params[0].tensor().value()(0, 0) == doctest::Approx(2.0 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("quadratic bowl converges") {
    ParameterList<double> params;
    params.add(Parameter<double>("x", mat(1, 1, {1.0})));
    Adam<double> adam(params, AdamOptions{0.01});
    for (int i = 0; i < 200; ++i) {
      adam.zero_grad();
      auto x = params[0].tensor();
      backward(sum(mul(x, x)));
      adam.step();
    }
    CHECK(std::abs(params[0].tensor().value()(0, 0)) < 0.1);
    CHECK(adam.steps() == 200);
  }
  SUBCASE("missing gradient names the parameter") {
    ParameterList<double> params;
    params.add(Parameter<double>("head.cls.w", mat(1, 1, {1.0})));
    Adam<double> adam(params, AdamOptions{});
    try {
      adam.step();
      FAIL("expected StateError");
    } catch (const StateError& e) {
      CHECK(std::string(e.what()).find("head.cls.w") != std::string::npos);
    }
  }
}

TEST_CASE("step decay schedule") {
  CHECK(step_decay_lr(1e-3, 0, 40, 5) == 1e-3);
  CHECK(step_decay_lr(1e-3, 39, 40, 5) == 1e-3);
  CHECK(step_decay_lr(1e-3, 40, 40, 5) == doctest::Approx(2e-4));
  CHECK(step_decay_lr(1e-3, 79, 40, 5) == doctest::Approx(2e-4));
  CHECK(step_decay_lr(1e-3, 80, 40, 5) == doctest::Approx(4e-5));
}

TEST_CASE("composed linear layers equal the collapsed map") {
  RandomState rng(16);
  const MatrixD x = random_matrix(5, 3, rng);
  auto w1 = leaf(random_matrix(3, 4, rng));
  auto b1 = leaf(random_matrix(1, 4, rng));
  auto w2 = leaf(random_matrix(4, 2, rng));
  auto b2 = leaf(random_matrix(1, 2, rng));
  const MatrixD g = random_matrix(5, 2, rng);
  auto xi = leaf(x);
  backward(project(linear(linear(xi, w1, b1), w2, b2), g));
  // y = x W1 W2 + (b1 W2 + b2): dx = G (W1 W2)^T, dW2 = (x W1 + b1)^T G
  const MatrixD collapsed = w1.value() * w2.value();
  CHECK((xi.grad() - g * collapsed.transpose()).norm() < 1e-12);
  const MatrixD hidden = (x * w1.value()).rowwise() + b1.value().row(0);
  CHECK((w2.grad() - hidden.transpose() * g).norm() < 1e-12);
  CHECK((w1.grad() - x.transpose() * g * w2.value().transpose()).norm() < 1e-12);
  const MatrixD db1 = g.colwise().sum() * w2.value().transpose();
  CHECK((b1.grad() - db1).norm() < 1e-12);
}

TEST_CASE("grad tape replays in reverse execution order and reaches every parameter") {
  RandomState rng(17);
  Mlp<double> mlp("m", {3, 4, 4, 1}, false, rng);
  ParameterList<double> params;
  mlp.collect(params);
  const auto out = sum(mlp(TensorD(random_matrix(6, 3, rng))));
  GradTape<double> tape(out);
  const auto& ops = tape.operations();
  REQUIRE(!ops.empty());
  for (std::size_t i = 1; i < ops.size(); ++i) CHECK(ops[i - 1]->sequence < ops[i]->sequence);
  CHECK(ops.back() == out.node().get());
  tape.backward();
  for (const auto& p : params) CHECK(p.tensor().has_grad());
}

TEST_CASE("no-grad guard records nothing") {
  auto x = leaf(MatrixD::Ones(2, 2));
  NoGradGuard guard;
  const auto y = sum(mul(x, x));
  CHECK(!y.requires_grad());
}

TEST_CASE("non-finite values are errors") {
  MatrixD nan = MatrixD::Zero(2, 2);
  nan(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TensorD{nan}, NumericError);
  const TensorD huge(MatrixD::Constant(1, 1, 1e200));
  CHECK_THROWS_AS(matmul(huge, huge), NumericError);
  CHECK_THROWS_AS(TensorD{MatrixD(0, 3)}, DimensionError);
}

TEST_CASE("no overflow on inputs of magnitude 1e6") {
  using TF = Tensor<float>;
  RandomState rng(18);
  Matrix<float> x(4, 5);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.uniform(-1e6, 1e6));
  const TF t(x);
  CHECK_NOTHROW(softmax_rows(t));
  CHECK_NOTHROW(sigmoid(t));
  CHECK_NOTHROW(l2_normalize_rows(t));
  CHECK_NOTHROW(relu(t));
  CHECK_NOTHROW(mean_over_axis(t, 0));
  Matrix<float> target = Matrix<float>::Zero(4, 5);
  target(0, 0) = 1;
  CHECK_NOTHROW(bce_loss(t, target));
}

TEST_CASE("checkpoint round trip is bit exact") {
  RandomState rng(19);
  ParameterList<float> params;
  params.add(Parameter<float>("a.w", uniform_init<float>(3, 4, 1.0, rng)));
  params.add(Parameter<float>("b", uniform_init<float>(1, 7, 1e-3, rng)));
  params[1].tensor().mutable_value()(0, 0) = -0.0f;
  const auto dir = std::filesystem::temp_directory_path() / "pttr_test_ckpt";
  std::filesystem::create_directories(dir);
  save_checkpoint(params, dir / "net");

  ParameterList<float> loaded;
  loaded.add(Parameter<float>("b", Matrix<float>::Zero(1, 7)));
  loaded.add(Parameter<float>("a.w", Matrix<float>::Zero(3, 4)));
  load_checkpoint(loaded, dir / "net");
  for (Index i = 0; i < 12; ++i) {
    CHECK(std::bit_cast<std::uint32_t>(loaded[1].tensor().value().data()[i]) ==
          std::bit_cast<std::uint32_t>(params[0].tensor().value().data()[i]));
  }
  for (Index i = 0; i < 7; ++i) {
    CHECK(std::bit_cast<std::uint32_t>(loaded[0].tensor().value().data()[i]) ==
          std::bit_cast<std::uint32_t>(params[1].tensor().value().data()[i]));
  }

  ParameterList<float> missing;
  missing.add(Parameter<float>("c", Matrix<float>::Zero(1, 1)));
  CHECK_THROWS_AS(load_checkpoint(missing, dir / "net"), StateError);
  ParameterList<float> wrong;
  wrong.add(Parameter<float>("a.w", Matrix<float>::Zero(4, 3)));
  CHECK_THROWS_AS(load_checkpoint(wrong, dir / "net"), StateError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parameter names are unique") {
  ParameterList<float> params;
  params.add(Parameter<float>("x", Matrix<float>::Zero(1, 1)));
  CHECK_THROWS_AS(params.add(Parameter<float>("x", Matrix<float>::Zero(1, 1))), ConfigError);
}

TEST_CASE("forked random streams ignore parent draws") {
  RandomState a(42), b(42);
  for (int i = 0; i < 10; ++i) b.uniform(0, 1);
  auto fa = a.fork(3), fb = b.fork(3);
  CHECK(fa.uniform(0, 1) == fb.uniform(0, 1));
  CHECK(a.fork(3).uniform(0, 1) != a.fork(4).uniform(0, 1));
}
