#include "pfolio/preprocessing.hpp"

#include <doctest.h>

#include <cmath>

#include "pfolio/errors.hpp"
#include "testutil.hpp"

using namespace pfolio;
using test::TO;

namespace {

Matrix single_column(const std::vector<double>& values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m.at(i, 0) = values[i];
  return m;
}

}  // namespace

TEST_CASE("zscore normalization uses the population stddev") {
  Matrix rows = single_column({1, 2, 3});
  auto state = fit_normalization(rows, NormalizationKind::zscore);
  Matrix out = apply_normalization(state, rows);
  CHECK(out.at(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(out.at(1, 0) == doctest::Approx(0.0));
  CHECK(out.at(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("linear normalization maps the training range to [0,1]") {
  Matrix rows = single_column({1, 2, 3});
  auto state = fit_normalization(rows, NormalizationKind::linear);
  Matrix out = apply_normalization(state, rows);
  CHECK(out.at(0, 0) == 0.0);
  CHECK(out.at(1, 0) == 0.5);
  CHECK(out.at(2, 0) == 1.0);
}

TEST_CASE("degenerate features normalize to zero") {
  Matrix rows = single_column({5, 5, 5});
  for (auto kind : {NormalizationKind::zscore, NormalizationKind::linear}) {
    auto state = fit_normalization(rows, kind);
    Matrix out = apply_normalization(state, rows);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.at(i, 0) == 0.0);
  }
}

TEST_CASE("apply_normalization does not clip test rows") {
  auto state = fit_normalization(single_column({1, 3}),
                                 NormalizationKind::linear);
  std::vector<double> mid{2.0}, outside{5.0};
  CHECK(apply_normalization(state, mid)[0] == 0.5);
  CHECK(apply_normalization(state, outside)[0] == 2.0);
}

TEST_CASE("normalization kind none is the identity") {
  auto state = fit_normalization(single_column({1, 3}),
                                 NormalizationKind::none);
  std::vector<double> row{42.0};
  CHECK(apply_normalization(state, row) == row);
}

TEST_CASE("normalization errors") {
  CHECK_THROWS_AS(fit_normalization(Matrix(0, 1), NormalizationKind::zscore),
                  ValidationError);
  auto state = fit_normalization(single_column({1, 2}),
                                 NormalizationKind::zscore);
  std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(apply_normalization(state, wrong), ValidationError);
}

TEST_CASE("refitting zscore on normalized data is the identity transform") {
  Rng rng(3);
  Matrix rows(40, 5);
  for (auto& v : rows.data) v = uniform_real(rng, -10, 50);
  auto state = fit_normalization(rows, NormalizationKind::zscore);
  Matrix normalized = apply_normalization(state, rows);
  auto refit = fit_normalization(normalized, NormalizationKind::zscore);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(std::abs(refit.offset[j]) < 1e-9);
    CHECK(std::abs(refit.scale[j] - 1.0) < 1e-9);
  }
}

TEST_CASE("imputation fills training medians") {
  SUBCASE("median of observed values") {
    Matrix rows = single_column({1, Matrix::missing(), 3});
    auto [state, filled] = [&] {
      auto s = fit_imputation(rows);
      return std::make_pair(s, apply_imputation(s, rows));
    }();
    CHECK(state.fill[0] == 2.0);
    CHECK(filled.at(1, 0) == 2.0);
  }
  SUBCASE("all-missing feature falls back to zero") {
    Matrix rows = single_column({Matrix::missing(), Matrix::missing()});
    auto state = fit_imputation(rows);
    CHECK(state.fill[0] == 0.0);
    CHECK(apply_imputation(state, rows).at(0, 0) == 0.0);
  }
  SUBCASE("no missing values: identity") {
    Matrix rows = single_column({4, 8});
    auto state = fit_imputation(rows);
    Matrix out = apply_imputation(state, rows);
    CHECK(out.data == rows.data);
  }
}

TEST_CASE("performance transformations") {
  Scenario s = test::make_scenario({"A"}, {{100.0}, {TO}, {42.5}}, 600);
  SUBCASE("par10 penalizes timeouts tenfold") {
    Matrix out = transform_performance(s.performance, 600,
                                       PerformanceTransform::par10);
    CHECK(out.at(0, 0) == 100.0);
    CHECK(out.at(1, 0) == 6000.0);
  }
  SUBCASE("log is base 10 with a 5ms floor") {
    Matrix out = transform_performance(s.performance, 600,
                                       PerformanceTransform::log);
    CHECK(out.at(0, 0) == doctest::Approx(2.0));
    Scenario tiny = test::make_scenario({"A"}, {{0.001}}, 600);
    Matrix floored = transform_performance(tiny.performance, 600,
                                           PerformanceTransform::log);
    CHECK(floored.at(0, 0) == doctest::Approx(std::log10(0.005)));
  }
  SUBCASE("raw passes through") {
    Matrix out = transform_performance(s.performance, 600,
                                       PerformanceTransform::raw);
    CHECK(out.at(2, 0) == 42.5);
  }
}

TEST_CASE("filter_algorithms drops zero-contribution algorithms") {
  SUBCASE("dominated algorithm is removed") {
    Scenario s = test::make_scenario({"A", "B"},
                                     {{1, 2}, {2, 3}, {3, 4}}, 600);
    auto retained = filter_algorithms(s, test::iota_ids(3));
    CHECK(retained == std::vector<std::size_t>{0});
  }
  SUBCASE("complementary algorithms are both retained") {
    Scenario s = test::make_scenario({"A", "B"}, {{1, 5}, {5, 1}}, 600);
    auto retained = filter_algorithms(s, test::iota_ids(2));
    CHECK(retained == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("never-strictly-best algorithm is removed") {
    // C matches the per-instance minimum twice but is never strictly best;
    // removing it keeps every minimum.
    Scenario s = test::make_scenario(
        {"A", "B", "C"},
        {{1, 9, 1}, {9, 1, 5}, {3, 9, 3}, {9, 2, 2}, {2, 3, 9}}, 600);
    auto ids = test::iota_ids(5);
    auto retained = filter_algorithms(s, ids);
    CHECK(retained == std::vector<std::size_t>{0, 1});

    // Brute-force check over all subsets: {A,B} is a minimal subset that
    // preserves the oracle PAR10.
    double reference = test::vbs_par10_oracle(s, ids, {0, 1, 2});
    CHECK(test::vbs_par10_oracle(s, ids, {0, 1}) == reference);
    CHECK(test::vbs_par10_oracle(s, ids, {0}) > reference);
    CHECK(test::vbs_par10_oracle(s, ids, {1}) > reference);
    CHECK(test::vbs_par10_oracle(s, ids, {2}) > reference);
    CHECK(test::vbs_par10_oracle(s, ids, {0, 2}) > reference);
    CHECK(test::vbs_par10_oracle(s, ids, {1, 2}) > reference);
  }
  SUBCASE("filtering never changes the training oracle PAR10") {
    Rng rng(11);
    for (int round = 0; round < 25; ++round) {
      Scenario s = test::make_random_scenario(rng, 8, 5, 100);
      auto ids = test::iota_ids(8);
      auto retained = filter_algorithms(s, ids);
      CHECK(!retained.empty());
      CHECK(test::vbs_par10_oracle(s, ids, retained) ==
            test::vbs_par10_oracle(s, ids, test::iota_ids(5)));
    }
  }
}
