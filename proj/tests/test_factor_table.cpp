#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lgbp/errors.hpp"
#include "lgbp/factor_table.hpp"

using namespace lgbp;

namespace {

FactorTable natural(std::vector<VarId> scope, std::vector<int> cards,
                    std::vector<double> values) {
  std::vector<lgbp::LogReal> logv;
  for (double v : values) logv.push_back(std::log(v));
  return FactorTable(std::move(scope), std::move(cards), std::move(logv));
}

double at(const FactorTable& t, const std::vector<int>& assignment) {
  return std::exp(t.logAt(assignment));
}

}  // namespace

TEST_CASE("layout is row-major with the first variable most significant") {
  FactorTable t({0, 1}, {2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(t.indexOf({0, 0}) == 0);
  CHECK(t.indexOf({0, 2}) == 2);
  CHECK(t.indexOf({1, 0}) == 3);
  CHECK(t.indexOf({1, 2}) == 5);
}

TEST_CASE("multiply matches an explicit nested-loop product") {
  FactorTable a = natural({0, 1}, {2, 2}, {1, 2, 3, 4});
  FactorTable b = natural({1, 2}, {2, 3}, {1, 2, 3, 4, 5, 6});
  FactorTable p = multiply(a, b);
  REQUIRE(p.scope() == std::vector<VarId>{0, 1, 2});
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 3; ++z) {
        double expected = at(a, {x, y}) * at(b, {y, z});
        CHECK(at(p, {x, y, z}) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("multiply by a scalar keeps the table") {
  FactorTable a = natural({0}, {3}, {1, 2, 3});
  FactorTable p = multiply(a, FactorTable());
  CHECK(p.scope() == a.scope());
  for (int x = 0; x < 3; ++x) {
    CHECK(at(p, {x}) == doctest::Approx(at(a, {x})));
  }
}

TEST_CASE("marginalize sums out the dropped variables") {
  FactorTable a = natural({0, 1}, {2, 3}, {1, 2, 3, 4, 5, 6});
  FactorTable m = marginalize_sum(a, {0});
  CHECK(at(m, {0}) == doctest::Approx(1 + 2 + 3));
  CHECK(at(m, {1}) == doctest::Approx(4 + 5 + 6));
  FactorTable m2 = marginalize_sum(a, {1});
  CHECK(at(m2, {0}) == doctest::Approx(1 + 4));
  CHECK(at(m2, {2}) == doctest::Approx(3 + 6));
}

TEST_CASE("marginalize with full scope reorders") {
  FactorTable a = natural({0, 1}, {2, 2}, {1, 2, 3, 4});
  FactorTable r = marginalize_sum(a, {1, 0});
  CHECK(r.scope() == std::vector<VarId>{1, 0});
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      CHECK(at(r, {y, x}) == doctest::Approx(at(a, {x, y})));
    }
  }
}

TEST_CASE("divide broadcasts the denominator") {
  FactorTable a = natural({0, 1}, {2, 2}, {2, 4, 6, 8});
  FactorTable b = natural({1}, {2}, {2, 4});
  FactorTable q = divide(a, b);
  CHECK(at(q, {0, 0}) == doctest::Approx(1));
  CHECK(at(q, {0, 1}) == doctest::Approx(1));
  CHECK(at(q, {1, 0}) == doctest::Approx(3));
  CHECK(at(q, {1, 1}) == doctest::Approx(2));
}

TEST_CASE("divide requires the denominator scope inside the numerator's") {
  FactorTable a = natural({0}, {2}, {1, 2});
  FactorTable b = natural({1}, {2}, {1, 2});
  CHECK_THROWS_AS(divide(a, b), Error);
}

TEST_CASE("zero over zero is one at the log floor") {
  FactorTable a({0}, {2}, {kLogFloor, 0.0});
  FactorTable b({0}, {2}, {kLogFloor, 0.0});
  FactorTable q = divide(a, b);
  CHECK(q.logValues()[0] == doctest::Approx(0.0));
  CHECK(q.logValues()[1] == doctest::Approx(0.0));
}

TEST_CASE("rename substitutes variables in place") {
  FactorTable a = natural({0, 1}, {2, 2}, {1, 2, 3, 4});
  FactorTable r = rename(a, {{0, 5}, {1, 7}});
  CHECK(r.scope() == std::vector<VarId>{5, 7});
  CHECK(r.logValues() == a.logValues());
}

TEST_CASE("rename rejects partial or colliding maps") {
  FactorTable a = natural({0, 1}, {2, 2}, {1, 2, 3, 4});
  CHECK_THROWS_AS(rename(a, {{0, 5}}), Error);
  CHECK_THROWS_AS(rename(a, {{0, 5}, {1, 5}}), Error);
}

TEST_CASE("power exponentiates entrywise") {
  FactorTable a = natural({0}, {2}, {2, 3});
  FactorTable p = power(a, 3);
  CHECK(at(p, {0}) == doctest::Approx(8));
  CHECK(at(p, {1}) == doctest::Approx(27));
  FactorTable ones = power(a, 0);
  CHECK(at(ones, {0}) == doctest::Approx(1));
  CHECK_THROWS_AS(power(a, -1), Error);
}

TEST_CASE("normalize makes the natural-space sum one") {
  FactorTable a = natural({0}, {3}, {1, 2, 5});
  FactorTable n = normalize(a);
  CHECK(at(n, {0}) == doctest::Approx(1.0 / 8));
  CHECK(at(n, {2}) == doctest::Approx(5.0 / 8));
  CHECK(log_total(n) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("damp is a log-space convex combination") {
  FactorTable oldT = natural({0}, {2}, {1, 4});
  FactorTable newT = natural({0}, {2}, {4, 1});
  FactorTable d = damp(oldT, newT, 0.5);
  CHECK(at(d, {0}) == doctest::Approx(2));
  CHECK(at(d, {1}) == doctest::Approx(2));
  FactorTable same = damp(oldT, newT, 1.0);
  CHECK(at(same, {0}) == doctest::Approx(4));
}

TEST_CASE("max_abs_log_diff tolerates reordered scopes") {
  FactorTable a = natural({0, 1}, {2, 2}, {1, 2, 3, 4});
  FactorTable b = marginalize_sum(a, {1, 0});
  CHECK(max_abs_log_diff(a, b) == doctest::Approx(0.0).epsilon(1e-12));
  FactorTable c = natural({0, 1}, {2, 2}, {1, 2, 3, 8});
  CHECK(max_abs_log_diff(a, c) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("table operations are counted") {
  reset_table_op_count();
  FactorTable a = natural({0}, {2}, {1, 2});
  FactorTable b = natural({0}, {2}, {3, 4});
  (void)multiply(a, b);
  (void)normalize(a);
  CHECK(table_op_count() == 2);
}
