#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <taskdict/elastic_net.hpp>

#include "../support/cd_oracle.hpp"
#include "../support/test_util.hpp"

using namespace taskdict;
using taskdict::testing::coordinate_descent_oracle;
using taskdict::testing::random_dictionary;
using taskdict::testing::random_vector;

namespace {

ElasticNetParams default_params() {
  ElasticNetParams p;
  p.lambda1 = 0.15;
  p.lambda2 = 0.01;
  return p;
}

}  // namespace

TEST_CASE("zero signal codes to zero") {
  Rng rng(1);
  const Dictionary D = random_dictionary(rng, 8, 16);
  const SparseCode code = solve(Vector::Zero(8), D, default_params());
  CHECK(code.alpha.isZero(0.0));
  CHECK(code.active.empty());
  CHECK(code.objective == doctest::Approx(0.0));
  const auto report = check_kkt(Vector::Zero(8), D, code.alpha, default_params());
  CHECK(report.pass);
  CHECK(report.max_violation() == 0.0);
}

TEST_CASE("single atom: inside and outside the l1 threshold") {
  Rng rng(2);
  Vector d = random_vector(rng, 5);
  d /= d.norm();
  const Dictionary D{Matrix(d)};
  ElasticNetParams params = default_params();

  SUBCASE("correlation below lambda1 stays at zero") {
    const Vector x = 0.1 * d;  // c = 0.1 < 0.15
    const SparseCode code = solve(x, D, params);
    CHECK(code.alpha(0) == 0.0);
  }
  SUBCASE("soft-threshold closed form") {
    const Vector x = -0.8 * d;  // c = -0.8
    const SparseCode code = solve(x, D, params);
    const double expected = -(0.8 - params.lambda1) / (1.0 + params.lambda2);
    CHECK(code.alpha(0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(code.active == std::vector<int>{0});
    CHECK(code.signs(0) == -1.0);
  }
}

TEST_CASE("matches the coordinate-descent oracle on random instances") {
  Rng rng(3);
  const ElasticNetParams params = default_params();
  for (int trial = 0; trial < 100; ++trial) {
    const Dictionary D = random_dictionary(rng, 10, 20);
    const Vector x = random_vector(rng, 10);
    const SparseCode code = solve(x, D, params);
    const Vector oracle = coordinate_descent_oracle(x, D, params);
    CHECK((code.alpha - oracle).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(check_kkt(x, D, code.alpha, params).pass);
  }
}

TEST_CASE("objective value matches the definition and certifies optimality") {
  Rng rng(4);
  const ElasticNetParams params = default_params();
  const Dictionary D = random_dictionary(rng, 12, 30);
  const Vector x = random_vector(rng, 12);
  const SparseCode code = solve(x, D, params);
  CHECK(code.objective ==
        doctest::Approx(coding_objective(x, D, code.alpha, params)).epsilon(1e-12));

  // No random feasible perturbation does better.
  for (int i = 0; i < 1000; ++i) {
    Vector perturbed = code.alpha + 0.05 * random_vector(rng, 30);
    CHECK(coding_objective(x, D, perturbed, params) >= code.objective - 1e-12);
  }
}

TEST_CASE("cholesky factor reconstructs the regularized active Gram matrix") {
  Rng rng(5);
  const ElasticNetParams params = default_params();
  for (int trial = 0; trial < 20; ++trial) {
    const Dictionary D = random_dictionary(rng, 10, 25);
    const Vector x = random_vector(rng, 10);
    const SparseCode code = solve(x, D, params);
    const Index n = static_cast<Index>(code.active.size());
    if (n == 0) continue;
    Matrix sub(10, n);
    for (Index k = 0; k < n; ++k) sub.col(k) = D.atoms.col(code.active[k]);
    Matrix gram = sub.transpose() * sub;
    gram.diagonal().array() += params.lambda2;
    const Matrix rebuilt = code.chol * code.chol.transpose();
    CHECK((rebuilt - gram).norm() <= 1e-10 * std::max(1.0, gram.norm()));
    for (Index k = 0; k < n; ++k) {
      CHECK(code.signs(k) == (code.alpha(code.active[k]) > 0 ? 1.0 : -1.0));
      CHECK(code.alpha(code.active[k]) != 0.0);
    }
  }
}

TEST_CASE("kkt check flags a perturbed coefficient") {
  Rng rng(6);
  const ElasticNetParams params = default_params();
  const Dictionary D = random_dictionary(rng, 10, 20);
  const Vector x = random_vector(rng, 10);
  SparseCode code = solve(x, D, params);
  REQUIRE(!code.active.empty());
  Vector alpha = code.alpha;
  alpha(code.active.front()) += 0.1;
  CHECK(!check_kkt(x, D, alpha, params).pass);
}

TEST_CASE("active_closed_form agrees with solve") {
  Rng rng(7);
  const ElasticNetParams params = default_params();

  SUBCASE("single unit atom") {
    Vector d = random_vector(rng, 6);
    d /= d.norm();
    const Dictionary D{Matrix(d)};
    const Vector x = 2.0 * d;
    const SparseCode code = solve(x, D, params);
    const Vector closed = active_closed_form(x, D, code.active, code.signs, params);
    CHECK(closed(0) == doctest::Approx((2.0 - params.lambda1) / (1.0 + params.lambda2)));
    CHECK(closed(0) == doctest::Approx(code.alpha(code.active[0])).epsilon(1e-12));
  }

  SUBCASE("solve output feeds back") {
    for (int trial = 0; trial < 20; ++trial) {
      const Dictionary D = random_dictionary(rng, 10, 20);
      const Vector x = random_vector(rng, 10);
      const SparseCode code = solve(x, D, params);
      if (code.active.empty()) continue;
      const Vector closed = active_closed_form(x, D, code.active, code.signs, params);
      for (Index k = 0; k < closed.size(); ++k) {
        CHECK(std::abs(closed(k) - code.alpha(code.active[k])) < 1e-10);
      }
    }
  }

  SUBCASE("unregularized square system reduces to least squares") {
    const Dictionary D = random_dictionary(rng, 6, 6);
    const Vector x = random_vector(rng, 6);
    ElasticNetParams params0;
    params0.lambda1 = 0.0;
    params0.lambda2 = 0.0;
    params0.allow_unregularized = true;
    std::vector<int> active{0, 1, 2, 3, 4, 5};
    const Vector signs = Vector::Ones(6);  // signs are irrelevant at lambda1 = 0
    const Vector closed = active_closed_form(x, D, active, signs, params0);
    const Vector ols = D.atoms.colPivHouseholderQr().solve(x);
    CHECK((closed - ols).lpNorm<Eigen::Infinity>() < 1e-8);
  }

  SUBCASE("collinear atoms without lambda2 fail") {
    Matrix atoms(4, 2);
    atoms.col(0) = Vector::Unit(4, 0);
    atoms.col(1) = Vector::Unit(4, 0);
    const Dictionary D{atoms};
    ElasticNetParams params0 = default_params();
    params0.lambda2 = 0.0;
    const Vector signs = Vector::Ones(2);
    CHECK_THROWS_WITH_AS(
        active_closed_form(Vector::Ones(4), D, {0, 1}, signs, params0),
        doctest::Contains("lambda2"), std::invalid_argument);
  }
}

TEST_CASE("batch_solve equals per-signal solve") {
  Rng rng(8);
  const ElasticNetParams params = default_params();
  const Dictionary D = random_dictionary(rng, 10, 20);

  SUBCASE("single column") {
    const Vector x = random_vector(rng, 10);
    const auto codes = batch_solve(x, D, params);
    const SparseCode one = solve(x, D, params);
    CHECK((codes[0].alpha - one.alpha).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("200 random columns") {
    const Matrix X = taskdict::testing::random_matrix(rng, 10, 200);
    const auto codes = batch_solve(X, D, params, 2);
    for (Index i = 0; i < X.cols(); ++i) {
      const SparseCode one = solve(X.col(i), D, params);
      CHECK((codes[static_cast<std::size_t>(i)].alpha - one.alpha)
                .lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }

  SUBCASE("duplicated columns produce identical codes") {
    Matrix X(10, 2);
    X.col(0) = random_vector(rng, 10);
    X.col(1) = X.col(0);
    const auto codes = batch_solve(X, D, params);
    CHECK(codes[0].alpha == codes[1].alpha);
  }
}

TEST_CASE("zero dominance: lambda1 at the correlation bound") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Dictionary D = random_dictionary(rng, 8, 16);
    const Vector x = random_vector(rng, 8);
    ElasticNetParams params = default_params();
    params.lambda1 = (D.atoms.transpose() * x).lpNorm<Eigen::Infinity>();
    const SparseCode code = solve(x, D, params);
    CHECK(code.alpha.isZero(0.0));
  }
}

TEST_CASE("lipschitz ratio is bounded and non-increasing in lambda2") {
  Rng rng(10);
  const Dictionary D = random_dictionary(rng, 10, 20);
  const Vector x0 = random_vector(rng, 10);

  const auto max_ratio = [&](double lambda2) {
    ElasticNetParams params = default_params();
    params.lambda2 = lambda2;
    Rng delta_rng(77);  // same perturbations for every lambda2
    double worst = 0.0;
    const Vector base = solve(x0, D, params).alpha;
    for (int i = 0; i < 1000; ++i) {
      Vector delta = random_vector(delta_rng, 10);
      delta *= 1e-4 / delta.norm();
      const Vector moved = solve(x0 + delta, D, params).alpha;
      worst = std::max(worst, (moved - base).norm() / delta.norm());
    }
    return worst;
  };

  const double c1 = max_ratio(0.01);
  const double c2 = max_ratio(0.1);
  const double c3 = max_ratio(1.0);
  MESSAGE("lipschitz constants: ", c1, " ", c2, " ", c3);
  CHECK(std::isfinite(c1));
  CHECK(c1 >= c2);
  CHECK(c2 >= c3);
}

TEST_CASE("lasso path (lambda2 = 0) still certifies") {
  Rng rng(11);
  ElasticNetParams params;
  params.lambda1 = 0.1;
  params.lambda2 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Dictionary D = random_dictionary(rng, 12, 24);
    const Vector x = random_vector(rng, 12);
    const SparseCode code = solve(x, D, params);
    CHECK(check_kkt(x, D, code.alpha, params).pass);
    const Vector oracle = coordinate_descent_oracle(x, D, params, 1e-9);
    CHECK((code.alpha - oracle).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("lambda1 = 0 fits least squares on a full-rank dictionary") {
  Rng rng(12);
  const Dictionary D = random_dictionary(rng, 10, 6);
  const Vector x = random_vector(rng, 10);
  ElasticNetParams params;
  params.lambda1 = 0.0;
  params.lambda2 = 1e-8;
  const SparseCode code = solve(x, D, params);
  Matrix gram = D.atoms.transpose() * D.atoms;
  gram.diagonal().array() += params.lambda2;
  const Vector expected = gram.ldlt().solve(D.atoms.transpose() * x);
  CHECK((code.alpha - expected).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("duplicate atoms split the weight under lambda2 > 0") {
  Vector d(3);
  d << 1.0, 0.0, 0.0;
  Matrix atoms(3, 2);
  atoms.col(0) = d;
  atoms.col(1) = d;
  const Dictionary D{atoms};
  Vector x(3);
  x << 1.0, 0.0, 0.0;
  ElasticNetParams params = default_params();
  const SparseCode code = solve(x, D, params);
  CHECK(code.active.size() == 2);
  CHECK(code.alpha(0) == doctest::Approx(code.alpha(1)).epsilon(1e-12));
  CHECK(check_kkt(x, D, code.alpha, params).pass);
}

TEST_CASE("rejected inputs") {
  Rng rng(13);
  const Dictionary D = random_dictionary(rng, 6, 12);

  SUBCASE("non-finite signal") {
    Vector x = random_vector(rng, 6);
    x(2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve(x, D, default_params()), std::invalid_argument);
  }
  SUBCASE("infeasible dictionary") {
    Dictionary bad = D;
    bad.atoms.col(0) *= 3.0;
    CHECK_THROWS_AS(solve(random_vector(rng, 6), bad, default_params()),
                    std::invalid_argument);
  }
  SUBCASE("both lambdas zero without opt-in") {
    ElasticNetParams params;
    params.lambda1 = 0.0;
    params.lambda2 = 0.0;
    CHECK_THROWS_AS(solve(random_vector(rng, 6), D, params), std::invalid_argument);
  }
  SUBCASE("active cap names the limit") {
    ElasticNetParams params = default_params();
    params.lambda1 = 1e-6;  // wants nearly everything active
    params.max_active = 2;
    try {
      solve(random_vector(rng, 6), D, params);
      FAIL("expected the cap to trip");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("shape mismatch in check_kkt") {
    CHECK_THROWS_AS(check_kkt(random_vector(rng, 5), D, Vector::Zero(12), default_params()),
                    std::invalid_argument);
  }
}
