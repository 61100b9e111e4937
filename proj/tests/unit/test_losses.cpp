#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <taskdict/losses.hpp>

#include "../support/finite_diff.hpp"
#include "../support/test_util.hpp"

using namespace taskdict;
using taskdict::testing::fd_gradient;
using taskdict::testing::random_matrix;
using taskdict::testing::random_vector;

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-7;

double rel_gap(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() /
         std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

// Flattens W-gradient checks through a vector view of W.
Matrix unflatten(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}
Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace

TEST_CASE("square loss: exact fit and hand arithmetic") {
  Rng rng(1);
  const Matrix W = random_matrix(rng, 3, 7);
  const Vector alpha = random_vector(rng, 7);
  const Vector y = W * alpha;

  const LossEval fit = square_loss(y, W, alpha);
  CHECK(fit.value == doctest::Approx(0.0));
  CHECK(fit.grad_w.isZero(1e-14));
  CHECK(fit.grad_alpha.isZero(1e-14));

  Matrix W1(1, 2);
  W1 << 1.0, 0.0;
  Vector a0 = Vector::Zero(2);
  Vector y1(1);
  y1 << 2.0;
  const LossEval hand = square_loss(y1, W1, a0);
  CHECK(hand.value == doctest::Approx(2.0));
  CHECK(hand.grad_alpha(0) == doctest::Approx(-2.0));
  CHECK(hand.grad_alpha(1) == doctest::Approx(0.0));
}

TEST_CASE("logistic loss: anchors and saturation") {
  Rng rng(2);
  const Vector w = random_vector(rng, 5);
  CHECK(logistic_loss(1, w, Vector::Zero(5)).value == doctest::Approx(std::log(2.0)));

  Vector w1(1), a1(1);
  w1 << 1.0;
  a1 << 40.0;
  const LossEval sat = logistic_loss(1, w1, a1);
  CHECK(sat.value < 1e-17);
  CHECK(sat.grad_alpha.lpNorm<Eigen::Infinity>() < 1e-16);
  CHECK(sat.grad_w.lpNorm<Eigen::Infinity>() < 1e-15);

  // Stable far into saturation.
  a1 << 700.0;
  CHECK(std::isfinite(logistic_loss(-1, w1, a1).value));
  CHECK(logistic_loss(-1, w1, a1).value == doctest::Approx(700.0));

  CHECK_THROWS_AS(logistic_loss(0, w, Vector::Zero(5)), std::invalid_argument);
}

TEST_CASE("bilinear logistic: anchors and reduction to the linear loss") {
  Rng rng(3);
  const Vector x = random_vector(rng, 4);
  const Vector alpha = random_vector(rng, 6);
  CHECK(bilinear_logistic_loss(-1, x, Matrix::Zero(4, 6), alpha).value ==
        doctest::Approx(std::log(2.0)));

  // m = 1, x = 1 embeds the linear model.
  const Vector w = random_vector(rng, 6);
  Vector one(1);
  one << 1.0;
  const LossEval bi = bilinear_logistic_loss(-1, one, w.transpose(), alpha);
  const LossEval lin = logistic_loss(-1, w, alpha);
  CHECK(bi.value == doctest::Approx(lin.value));
  CHECK(rel_gap(bi.grad_alpha, lin.grad_alpha) < 1e-14);
}

TEST_CASE("softmax: anchors, shift invariance, binary equivalence") {
  Rng rng(4);
  const Index q = 5, p = 7;
  const Vector alpha = random_vector(rng, p);

  // Uniform scores -> log q.
  CHECK(softmax_loss(3, Matrix::Zero(q, p), alpha).value == doctest::Approx(std::log(5.0)));

  // q = 2 with rows (w, -w) matches the logistic loss at doubled margin.
  const Vector w = random_vector(rng, p);
  Matrix W2(2, p);
  W2.row(0) = w.transpose();
  W2.row(1) = -w.transpose();
  const double soft = softmax_loss(1, W2, alpha).value;
  const double logi = std::log1p(std::exp(-2.0 * w.dot(alpha)));
  CHECK(soft == doctest::Approx(logi).epsilon(1e-10));

  CHECK_THROWS_AS(softmax_loss(0, W2, alpha), std::invalid_argument);
  CHECK_THROWS_AS(softmax_loss(3, W2, alpha), std::invalid_argument);
}

TEST_CASE("all gradients match central finite differences") {
  Rng rng(5);
  const Index p = 6, q = 4, m = 5;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector alpha = random_vector(rng, p);
    const Vector x = random_vector(rng, m);
    const Vector y = random_vector(rng, q);
    const int label = rng.uniform01() < 0.5 ? 1 : -1;
    const int cls = rng.uniform_int(1, static_cast<int>(q));

    struct Case {
      std::function<double(const Vector&, const Matrix&)> f;  // (alpha, W)
      Matrix W;
      LossEval eval;
    };
    std::vector<Case> cases;
    {
      Matrix W = random_matrix(rng, q, p);
      cases.push_back({[&, W](const Vector& a, const Matrix& Wm) {
                         return square_loss(y, Wm, a).value;
                       },
                       W, square_loss(y, W, alpha)});
    }
    {
      Matrix W = random_matrix(rng, p, 1);
      cases.push_back({[&, label](const Vector& a, const Matrix& Wm) {
                         return logistic_loss(label, Wm.col(0), a).value;
                       },
                       W, logistic_loss(label, W.col(0), alpha)});
    }
    {
      Matrix W = random_matrix(rng, m, p);
      cases.push_back({[&, label](const Vector& a, const Matrix& Wm) {
                         return bilinear_logistic_loss(label, x, Wm, a).value;
                       },
                       W, bilinear_logistic_loss(label, x, W, alpha)});
    }
    {
      Matrix W = random_matrix(rng, q, p);
      cases.push_back({[&, cls](const Vector& a, const Matrix& Wm) {
                         return softmax_loss(cls, Wm, a).value;
                       },
                       W, softmax_loss(cls, W, alpha)});
    }

    for (const auto& c : cases) {
      const Vector fd_alpha = fd_gradient(
          [&](const Vector& a) { return c.f(a, c.W); }, alpha, kFdStep);
      CHECK(rel_gap(fd_alpha, c.eval.grad_alpha) < kFdTol);

      const Vector wflat = flatten(c.W);
      const Vector fd_w = fd_gradient(
          [&](const Vector& wv) { return c.f(alpha, unflatten(wv, c.W.rows(), c.W.cols())); },
          wflat, kFdStep);
      CHECK(rel_gap(fd_w, flatten(c.eval.grad_w)) < kFdTol);
    }
  }
}

TEST_CASE("convexity in W at fixed alpha") {
  Rng rng(6);
  const Index p = 6, q = 4, m = 5;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector alpha = random_vector(rng, p);
    const Vector x = random_vector(rng, m);
    const Vector y = random_vector(rng, q);
    const int label = rng.uniform01() < 0.5 ? 1 : -1;
    const int cls = rng.uniform_int(1, static_cast<int>(q));
    const double t = rng.uniform(0.05, 0.95);

    const auto check_convex = [&](const std::function<double(const Matrix&)>& f,
                                  const Matrix& W1, const Matrix& W2) {
      const double mixed = f(t * W1 + (1.0 - t) * W2);
      CHECK(mixed <= t * f(W1) + (1.0 - t) * f(W2) + 1e-12);
    };

    check_convex([&](const Matrix& W) { return square_loss(y, W, alpha).value; },
                 random_matrix(rng, q, p), random_matrix(rng, q, p));
    check_convex([&](const Matrix& W) { return logistic_loss(label, W.col(0), alpha).value; },
                 random_matrix(rng, p, 1), random_matrix(rng, p, 1));
    check_convex(
        [&](const Matrix& W) { return bilinear_logistic_loss(label, x, W, alpha).value; },
        random_matrix(rng, m, p), random_matrix(rng, m, p));
    check_convex([&](const Matrix& W) { return softmax_loss(cls, W, alpha).value; },
                 random_matrix(rng, q, p), random_matrix(rng, q, p));
  }
}

TEST_CASE("numeric hessian-vector products are symmetric") {
  Rng rng(7);
  const Index p = 6, q = 4;
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const Vector alpha = random_vector(rng, p);
    const Vector y = random_vector(rng, q);
    const Matrix W = random_matrix(rng, q, p);
    const int cls = rng.uniform_int(1, static_cast<int>(q));

    for (const auto* which : {"square", "softmax"}) {
      const auto grad = [&](const Vector& a) -> Vector {
        return std::string(which) == "square" ? square_loss(y, W, a).grad_alpha
                                              : softmax_loss(cls, W, a).grad_alpha;
      };
      const Vector u = random_vector(rng, p);
      const Vector v = random_vector(rng, p);
      const double uHv = u.dot((grad(alpha + h * v) - grad(alpha - h * v)) / (2.0 * h));
      const double vHu = v.dot((grad(alpha + h * u) - grad(alpha - h * u)) / (2.0 * h));
      CHECK(std::abs(uHv - vHu) < 1e-6 * std::max(1.0, std::abs(uHv)));
    }
  }
}

TEST_CASE("loss dispatch and shape table") {
  Rng rng(8);
  TaskLoss square{LossKind::square, 3};
  CHECK(loss_w_shape(square, 7, 5) == std::pair<Index, Index>{3, 7});
  CHECK(loss_w_shape({LossKind::logistic, 1}, 7, 5) == std::pair<Index, Index>{7, 1});
  CHECK(loss_w_shape({LossKind::bilinear_logistic, 1}, 7, 5) == std::pair<Index, Index>{5, 7});
  CHECK(loss_w_shape({LossKind::softmax, 4}, 7, 5) == std::pair<Index, Index>{4, 7});

  Sample s;
  s.x = random_vector(rng, 5);
  s.target = random_vector(rng, 3);
  s.label = 1;
  const Vector alpha = random_vector(rng, 7);
  const Matrix W = random_matrix(rng, 3, 7);
  CHECK(eval_loss(square, s, W, alpha).value ==
        doctest::Approx(square_loss(s.target, W, alpha).value));

  CHECK(loss_kind_from_name("softmax") == LossKind::softmax);
  CHECK_THROWS_AS(loss_kind_from_name("hinge"), std::invalid_argument);
}
