#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "fraudaware/error.hpp"
#include "fraudaware/mlcore/classifier.hpp"
#include "fraudaware/mlcore/kmeans.hpp"
#include "fraudaware/mlcore/pca.hpp"
#include "fraudaware/rng.hpp"
#include "oracles.hpp"

using namespace fraudaware;
using namespace fraudaware::mlcore;
using namespace fraudaware::testing;

namespace {

// Two round blobs of n points each around -c and +c on every axis.
void blobs(Eigen::Index n, Eigen::Index d, double c, std::uint64_t seed, Matrix& x, Labels& y) {
  x = gaussian(2 * n, d, seed) * 0.5;
  y.assign(static_cast<std::size_t>(2 * n), 0);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const bool second = i >= n;
    x.row(i).array() += second ? c : -c;
    y[static_cast<std::size_t>(i)] = second ? 1 : 0;
  }
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Config;
}

}  // namespace

// ---- standardize --------------------------------------------------------------------

TEST_CASE("standardize") {
  FeatureMatrix m;
  m.values.resize(3, 2);
  m.values << 1, 5, 2, 5, 3, 5;
  m.col_names = {"a", "b"};
  const auto s = standardize(m);
  const double z = 1.0 / std::sqrt(2.0 / 3.0);  // population std of [1,2,3] is sqrt(2/3)
  CHECK(s.matrix.values(0, 0) == doctest::Approx(-z).epsilon(1e-12));
  CHECK(s.matrix.values(1, 0) == doctest::Approx(0.0));
  CHECK(s.matrix.values(2, 0) == doctest::Approx(1.2247).epsilon(1e-3));
  CHECK(s.matrix.values.col(1).isZero());
  CHECK(s.transform.scale(1) == 1.0);

  const auto again = standardize(s.matrix);
  CHECK((again.matrix.values - s.matrix.values).cwiseAbs().maxCoeff() < 1e-9);

  const Matrix big = gaussian(50, 4, 3) * 7.0;
  const auto st = fit_standardization(big);
  const Matrix zb = st.apply(big);
  CHECK(zb.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  for (int j = 0; j < 4; ++j) CHECK(std::sqrt(zb.col(j).array().square().mean()) == doctest::Approx(1.0));

  FeatureMatrix one;
  one.values = Matrix::Ones(1, 2);
  one.col_names = {"a", "b"};
  CHECK(code_of([&] { standardize(one); }) == ErrorCode::Domain);
}

TEST_CASE("feature matrix csv") {
  FeatureMatrix m;
  m.values = gaussian(5, 3, 9);
  m.col_names = {"age", "t_market_page", "n_trusted_read"};
  m.labels = Labels{0, 1, 1, 0, 1};
  const auto back = from_csv(to_csv(m));
  CHECK(back.values == m.values);
  CHECK(back.col_names == m.col_names);
  CHECK(back.labels == m.labels);

  CHECK(code_of([] { from_csv("a,b\n1,2\n3\n"); }) == ErrorCode::Schema);
  CHECK(code_of([] { from_csv("a,a\n1,2\n"); }) == ErrorCode::Validation);
  CHECK(code_of([] { from_csv("a,b\n1,x\n"); }) == ErrorCode::Schema);

  const auto sub = m.select_rows({4, 0});
  CHECK(sub.rows() == 2);
  CHECK(sub.labels == Labels{1, 0});
  CHECK(sub.values.row(0) == m.values.row(4));
}

// ---- PCA ----------------------------------------------------------------------------

TEST_CASE("pca on the line y = x") {
  Matrix x(5, 2);
  x << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  const auto m = pca_fit(x, 1);
  CHECK(m.components(0, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(m.components(0, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  // k = 2 exceeds min(n-1, d) only when n is tiny; here n-1 = 4 so it is allowed.
  const auto m2 = pca_fit(x, 2);
  CHECK(std::abs(m2.explained_variance(1)) < 1e-9);
}

TEST_CASE("pca on isotropic data") {
  const auto m = pca_fit(gaussian(10000, 3, 11), 3);
  const double ratio = m.explained_variance(0) / m.explained_variance(2);
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.25);
}

TEST_CASE("pca matches a power-iteration oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Matrix mix = gaussian(6, 6, 100 + seed);
    const Matrix x = gaussian(200, 6, seed) * mix;
    const auto m = pca_fit(x, 4);

    const auto st = fit_standardization(x);
    const Matrix z = st.apply(x);
    const Matrix cov = z.transpose() * z / static_cast<double>(z.rows() - 1);
    const auto oracle = power_iteration(cov, 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(m.explained_variance(j) == doctest::Approx(oracle.values[static_cast<std::size_t>(j)]).epsilon(1e-8));
      CHECK(std::abs(m.components.row(j).dot(oracle.vectors[static_cast<std::size_t>(j)])) ==
            doctest::Approx(1.0).epsilon(1e-8));
    }
    const Matrix gram = m.components * m.components.transpose();
    CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 0; j + 1 < 4; ++j) CHECK(m.explained_variance(j) >= m.explained_variance(j + 1));
    for (int j = 0; j < 4; ++j) {
      Eigen::Index arg = 0;
      m.components.row(j).cwiseAbs().maxCoeff(&arg);
      CHECK(m.components(j, arg) > 0);
    }
  }
}

TEST_CASE("pca reconstruction error falls with k") {
  const Matrix x = gaussian(80, 5, 4) * gaussian(5, 5, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 5; ++k) {
    const double e = pca_fit(x, k).reconstruction_error(x);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev < 1e-20);
}

TEST_CASE("pca top features") {
  Matrix x = Matrix::Constant(10, 5, 2.0);
  for (int i = 0; i < 10; ++i) x(i, 3) = i * i;
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  const auto m = pca_fit(x, 1);
  CHECK(pca_top_features(m, names, 1) == std::vector<std::string>{"d"});
  // the four constant columns tie at zero and come out in column order
  CHECK(pca_top_features(m, names, 5) == std::vector<std::string>{"d", "a", "b", "c", "e"});

  const auto full = pca_fit(gaussian(30, 5, 8), 4);
  auto all = pca_top_features(full, names, 5);
  std::sort(all.begin(), all.end());
  CHECK(all == names);
  CHECK(code_of([&] { pca_top_features(full, names, 0); }) == ErrorCode::Domain);
  CHECK(code_of([&] { pca_fit(gaussian(3, 5, 1), 3); }) == ErrorCode::Domain);
  CHECK(code_of([&] { pca_fit(gaussian(30, 5, 1), 0); }) == ErrorCode::Domain);
}

// ---- k-means ------------------------------------------------------------------------

TEST_CASE("kmeans k = 1") {
  const Matrix x = gaussian(40, 3, 21);
  const auto m = kmeans_fit(x, 1, 0);
  const Vector mean = x.colwise().mean().transpose();
  CHECK((m.centroids.row(0).transpose() - mean).norm() < 1e-12);
  const double total_var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().sum();
  CHECK(m.inertia == doctest::Approx(total_var * 40).epsilon(1e-12));
}

TEST_CASE("kmeans reaches the exhaustive optimum on small sets") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    SplitMix64 rng(seed);
    const auto n = static_cast<Eigen::Index>(3 + rng.below(6));  // 3..8
    const Matrix x = gaussian(n, 2, 1000 + seed);
    const auto m = kmeans_fit(x, 2, seed);
    CHECK(m.inertia == doctest::Approx(best_two_partition(x)).epsilon(1e-10));
  }
}

TEST_CASE("kmeans on two blobs") {
  Matrix x;
  Labels y;
  blobs(50, 2, 3.0, 0, x, y);
  const auto m = kmeans_fit(x, 2, 0);
  const Vector a = Vector::Constant(2, -3.0);
  const Vector b = Vector::Constant(2, 3.0);
  const Vector c0 = m.centroids.row(0).transpose();
  const Vector c1 = m.centroids.row(1).transpose();
  const double d = std::min(std::max((c0 - a).norm(), (c1 - b).norm()), std::max((c0 - b).norm(), (c1 - a).norm()));
  CHECK(d < 0.5);
}

TEST_CASE("kmeans iteration properties") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = gaussian(60, 3, 300 + seed);
    KMeansParams p;
    p.n_init = 1;
    const auto m = kmeans_fit(x, 4, seed, p);
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] + 1e-9);
    }
    CHECK(m.predict(x) == m.assignment);
    CHECK(m.inertia == doctest::Approx(kmeans_inertia(x, m.centroids)));
    CHECK(m.centroids.allFinite());
    // same inputs, same fit
    const auto again = kmeans_fit(x, 4, seed, p);
    CHECK(again.centroids == m.centroids);
  }
}

TEST_CASE("kmeans empty-cluster repair with duplicate points") {
  Matrix x(6, 1);
  x << 0, 0, 0, 0, 0, 10;
  const auto m = kmeans_fit(x, 3, 1);
  CHECK(m.centroids.allFinite());
  CHECK(m.inertia == doctest::Approx(0.0));
  CHECK(code_of([&] { kmeans_fit(x, 7, 1); }) == ErrorCode::Domain);
}

TEST_CASE("elbow") {
  Matrix x;
  Labels y;
  blobs(40, 3, 4.0, 5, x, y);
  const auto r = elbow_select(x, 1, 8, 0);
  CHECK(r.chosen_k == 2);
  CHECK(r.inertia.size() == 8);

  SplitMix64 rng(77);
  Matrix cube(200, 3);
  for (Eigen::Index i = 0; i < cube.size(); ++i) cube.data()[i] = rng.uniform();
  const auto u = elbow_select(cube, 1, 8, 3);
  for (std::size_t i = 1; i < u.inertia.size(); ++i) CHECK(u.inertia[i] <= u.inertia[i - 1]);

  CHECK(code_of([&] { elbow_select(x, 1, 2, 0); }) == ErrorCode::Domain);
  CHECK(code_of([&] { elbow_select(x, 1, 1000, 0); }) == ErrorCode::Domain);
}

// ---- decision tree ------------------------------------------------------------------

TEST_CASE("tree basics") {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  SUBCASE("single class") {
    const auto t = tree_fit(x, {1, 1, 1, 1});
    CHECK(t.nodes.size() == 1);
    CHECK(accuracy(Classifier{t}, x, {1, 1, 1, 1}) == 1.0);
  }
  SUBCASE("xor at depth 2") {
    const Labels y = {0, 1, 1, 0};
    const auto t = tree_fit(x, y, {2, 1});
    CHECK(accuracy(Classifier{t}, x, y) == 1.0);
    CHECK(t.depth() == 2);
    // the zero-gain root split goes to feature 0 at the midpoint
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 0.5);
  }
  SUBCASE("majority tie goes to the lowest class") {
    const auto t = tree_fit(x, {3, 1, 1, 3}, {0, 1});
    CHECK(t.predict(Vector::Zero(2)) == 1);
  }
  SUBCASE("empty input") { CHECK(code_of([] { tree_fit(Matrix(0, 2), {}); }) == ErrorCode::Domain); }
}

TEST_CASE("tree agrees with the depth-2 enumeration oracle") {
  int greedy_below_optimal = 0;
  int cases = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    SplitMix64 rng(seed);
    const auto n = static_cast<Eigen::Index>(2 + rng.below(11));  // 2..12
    const auto d = static_cast<Eigen::Index>(1 + rng.below(2));   // 1..2
    Matrix x(n, d);
    Labels y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = static_cast<double>(rng.below(6));  // many ties
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2 + seed % 2));
    }
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    for (int depth : {0, 1, 2}) {
      const auto t = tree_fit(x, y, {depth, 1});
      const double acc = accuracy(Classifier{t}, x, y);
      const int oracle = oracle_hits(x, y, rows, depth, [&](const std::vector<int>& r) { return cart_choice(x, y, r); });
      CHECK(acc == doctest::Approx(static_cast<double>(oracle) / static_cast<double>(n)));
      const int best = optimal_hits(x, y, rows, depth);
      CHECK(oracle <= best);
      ++cases;
      greedy_below_optimal += oracle < best;
    }
  }
  MESSAGE("greedy CART below the optimal depth<=2 tree in " << greedy_below_optimal << " of " << cases << " cases");
}

TEST_CASE("tree properties") {
  const Matrix x = gaussian(40, 3, 12);
  Labels y(40);
  SplitMix64 rng(5);
  for (auto& l : y) l = static_cast<int>(rng.below(3));

  const auto full = tree_fit(x, y);
  CHECK(accuracy(Classifier{full}, x, y) == 1.0);

  for (int depth : {1, 2, 3, 4}) {
    Matrix warped = x;
    warped.col(1) = x.col(1).array().exp() * 3.0 + 1.0;  // strictly increasing
    const auto a = tree_fit(x, y, {depth, 1});
    const auto b = tree_fit(warped, y, {depth, 1});
    CHECK(accuracy(Classifier{a}, x, y) == accuracy(Classifier{b}, warped, y));
  }

  const Classifier c{tree_fit(x, y, {3, 2})};
  CHECK(classifier_from_json(to_json(c)) == c);
  CHECK(to_json(classifier_from_json(to_json(c))).dump() == to_json(c).dump());
}

// ---- gradient boosting --------------------------------------------------------------

TEST_CASE("gbt") {
  Matrix x;
  Labels y;
  blobs(30, 2, 1.0, 3, x, y);

  SUBCASE("separable data within 50 rounds") {
    Matrix sep(40, 2);
    Labels ys(40);
    SplitMix64 rng(8);
    for (int i = 0; i < 40; ++i) {
      sep(i, 0) = rng.uniform(-1, 1);
      sep(i, 1) = rng.uniform(-1, 1);
      ys[static_cast<std::size_t>(i)] = sep(i, 0) + 0.5 * sep(i, 1) > 0 ? 1 : 0;
    }
    GbtParams p;
    p.n_rounds = 50;
    CHECK(accuracy(Classifier{gbt_fit(sep, ys, p)}, sep, ys) == 1.0);
  }
  SUBCASE("learning rate zero predicts the prior") {
    Labels skewed = y;
    for (std::size_t i = 0; i < 10; ++i) skewed[i] = 1;  // 40 positive of 60
    GbtParams p;
    p.learning_rate = 0;
    const auto m = gbt_fit(x, skewed, p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) CHECK(m.predict(x.row(i).transpose()) == 1);
    CHECK(m.predict_positive(x.row(0).transpose()) == doctest::Approx(40.0 / 60.0));
  }
  SUBCASE("training loss never rises") {
    Matrix noisy = gaussian(60, 4, 41);
    Labels yn(60);
    SplitMix64 rng(2);
    for (int i = 0; i < 60; ++i) yn[static_cast<std::size_t>(i)] = noisy(i, 0) + rng.normal() > 0;
    for (double lr : {0.05, 0.1, 0.5, 1.0}) {
      GbtParams p;
      p.learning_rate = lr;
      const auto m = gbt_fit(noisy, yn, p);
      REQUIRE(m.loss_history.size() == 101);
      for (std::size_t i = 1; i < m.loss_history.size(); ++i) {
        CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-12);
      }
    }
  }
  SUBCASE("single class is a constant model") {
    const auto m = gbt_fit(x, Labels(60, 1));
    CHECK(m.predict(x.row(0).transpose()) == 1);
    CHECK(Classifier{m}.predict(x.row(0).transpose()).confidence == 1.0);
  }
  SUBCASE("more than two classes") {
    Labels three = y;
    three[0] = 2;
    CHECK(code_of([&] { gbt_fit(x, three); }) == ErrorCode::Domain);
  }
  SUBCASE("serialization") {
    const Classifier c{gbt_fit(x, y)};
    const auto back = classifier_from_json(parse_json(to_json(c).dump(), "model"));
    CHECK(back == c);
  }
}

// ---- perceptron ---------------------------------------------------------------------

TEST_CASE("mlp gradient matches central differences") {
  const Matrix x = gaussian(5, 3, 17);
  const Labels y = {0, 1, 2, 1, 0};
  for (auto act : {Activation::Tanh, Activation::ReLU}) {
    MlpParams p;
    p.hidden = 4;
    p.activation = act;
    p.seed = 3;
    auto m = mlp_init(3, {0, 1, 2}, p);
    // nudge biases off zero so every parameter gets a non-trivial gradient
    m.b1.setConstant(0.1);
    m.b2 << 0.2, -0.1, 0.05;
    const auto lg = mlp_loss_and_gradient(m, x, y);
    const Vector theta = mlp_parameters(m);
    const double eps = 1e-5;
    double worst = 0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Vector tp = theta, tm = theta;
      tp(i) += eps;
      tm(i) -= eps;
      auto mp = m, mm = m;
      mlp_set_parameters(mp, tp);
      mlp_set_parameters(mm, tm);
      const double fd = (mlp_loss_and_gradient(mp, x, y).loss - mlp_loss_and_gradient(mm, x, y).loss) / (2 * eps);
      const double denom = std::max({std::abs(fd), std::abs(lg.gradient(i)), 1e-6});
      worst = std::max(worst, std::abs(fd - lg.gradient(i)) / denom);
    }
    INFO(to_string(act));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("mlp training") {
  Matrix x;
  Labels y;
  blobs(40, 4, 2.0, 0, x, y);
  const auto st = fit_standardization(x);
  const Matrix z = st.apply(x);
  auto split = stratified_split(y, 0.7, 0);
  FeatureMatrix fm{z, {"a", "b", "c", "d"}, y};
  const auto train = fm.select_rows(split.train);
  const auto test = fm.select_rows(split.test);

  MlpParams p;
  p.seed = 0;
  const auto m = mlp_fit(train.values, *train.labels, p);
  CHECK(accuracy(Classifier{m}, test.values, *test.labels) == 1.0);
  CHECK(m.loss_history.back() < m.loss_history.front());
  CHECK(m.loss_history.size() == 501);

  SUBCASE("zero epochs depends only on the seed") {
    MlpParams z0 = p;
    z0.epochs = 0;
    const auto a = mlp_fit(train.values, *train.labels, z0);
    const auto b = mlp_fit(train.values, *train.labels, z0);
    CHECK(a == b);
    CHECK(a.w1 == mlp_init(4, {0, 1}, z0).w1);
    z0.seed = 1;
    CHECK_FALSE(mlp_fit(train.values, *train.labels, z0).w1 == a.w1);
  }
  SUBCASE("glorot bounds") {
    const auto i = mlp_init(4, {0, 1}, p);
    CHECK(i.w1.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 20.0));
    CHECK(i.w2.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 18.0));
    CHECK(i.b1.isZero());
  }
  SUBCASE("serialization") {
    const Classifier c{m};
    CHECK(classifier_from_json(parse_json(to_json(c).dump(), "model")) == c);
    CHECK(code_of([&] {
            auto j = to_json(c);
            j["version"] = 9;
            classifier_from_json(j);
          }) == ErrorCode::Config);
  }
}

// ---- split and accuracy -------------------------------------------------------------

TEST_CASE("stratified split") {
  Labels y(33, 0);
  for (std::size_t i = 16; i < 33; ++i) y[i] = 1;
  const auto s = stratified_split(y, 0.7, 4);
  CHECK(s.train.size() == 22);
  CHECK(s.test.size() == 11);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(33);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);

  const auto again = stratified_split(y, 0.7, 4);
  CHECK(again.train == s.train);
  CHECK_FALSE(stratified_split(y, 0.7, 5).train == s.train);

  int test_novice = 0;
  for (auto i : s.test) test_novice += y[i] == 0;
  CHECK(test_novice == 5);  // 16 - floor(11.2)

  CHECK(code_of([&] { stratified_split(y, 1.0, 0); }) == ErrorCode::Domain);
  CHECK(code_of([&] { stratified_split(y, 0.0, 0); }) == ErrorCode::Domain);
  CHECK(code_of([&] { stratified_split({0, 0, 1}, 0.5, 0); }) == ErrorCode::Domain);

  const auto tiny = stratified_split({0, 0, 1, 1}, 0.1, 0);
  CHECK(tiny.train.size() == 2);
  CHECK(tiny.test.size() == 2);
}

TEST_CASE("accuracy") {
  const Labels truth = {0, 1, 0, 1};
  CHECK(accuracy(truth, truth) == 1.0);
  CHECK(accuracy(std::vector<int>(4, 0), truth) == 0.5);
  CHECK(code_of([] { accuracy(std::vector<int>{}, Labels{}); }) == ErrorCode::Domain);
}

TEST_CASE("prediction totality") {
  Matrix x;
  Labels y;
  blobs(20, 3, 1.5, 9, x, y);
  for (auto kind : kAllClassifierKinds) {
    const auto c = fit_classifier(kind, x, y);
    for (const Vector& v : {Vector(Vector::Zero(3)), Vector(Vector::Constant(3, 1e6)), Vector(Vector::Constant(3, -1e6))}) {
      const auto p = c.predict(v);
      CHECK((p.label == 0 || p.label == 1));
      CHECK(p.confidence >= 0.0);
      CHECK(p.confidence <= 1.0);
    }
    CHECK(c.kind() == kind);
  }
}
