#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "bench_models.hpp"
#include "doctest.h"
#include "lgbp/errors.hpp"
#include "lgbp/model.hpp"

using namespace lgbp;

namespace {

ErrorCode codeOf(const char* text) {
  try {
    (void)parse_model(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("parsing the pq model") {
  ParfactorModel m = parse_model(bench::kPq);
  REQUIRE(m.domains.size() == 1);
  CHECK(m.domains[0].name == "obj");
  CHECK(m.domains[0].size == 4);
  REQUIRE(m.predicates.size() == 2);
  CHECK(m.predicates[0].name == "p");
  CHECK(m.predicates[1].range == 2);
  REQUIRE(m.parfactors.size() == 1);
  const Parfactor& pf = m.parfactors[0];
  CHECK(pf.lvarNames == std::vector<std::string>{"X", "Y"});
  REQUIRE(pf.atoms.size() == 2);
  CHECK(pf.atoms[0].pred == 0);
  CHECK(pf.atoms[1].lvars == std::vector<int>{1});
  CHECK(pf.hasConstraint(0, 1));
  CHECK(pf.table.logAt({1, 0}) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("parse errors carry the right codes") {
  CHECK(codeOf("domain d = 2\nfrobnicate") == ErrorCode::SyntaxError);
  CHECK(codeOf("domain d = 2\nparfactor p(X) values [1.0]") ==
        ErrorCode::UnknownPredicate);
  CHECK(codeOf("predicate p(d)") == ErrorCode::UnknownDomain);
  CHECK(codeOf("domain d = 2\npredicate p(d)\nparfactor p(X) values [1.0]") ==
        ErrorCode::TableLengthMismatch);
  CHECK(codeOf("domain d = 2\npredicate p(d)\nparfactor p(X) values [1.0, 0.0]") ==
        ErrorCode::NonPositiveValue);
  CHECK(codeOf("domain d = 2\npredicate p(d, d, d)") == ErrorCode::ArityUnsupported);
  CHECK(codeOf("domain d = 2\npredicate p(d)\nparfactor p(alice) values [1.0, 2.0]") ==
        ErrorCode::ConstantTerm);
}

TEST_CASE("shatter keeps a constrained parfactor as is") {
  ParfactorModel m = shatter(parse_model(bench::kPp));
  REQUIRE(m.parfactors.size() == 1);
  CHECK(m.parfactors[0].atoms.size() == 2);
  CHECK(m.parfactors[0].hasConstraint(0, 1));
}

TEST_CASE("shatter splits an unconstrained pair into distinct and diagonal") {
  ParfactorModel m = shatter(parse_model(
      "domain d = 3\npredicate p(d)\nparfactor p(X), p(Y) values [1.0, 2.0, 2.0, 5.0]"));
  REQUIRE(m.parfactors.size() == 2);
  const Parfactor& merged = m.parfactors[0];
  REQUIRE(merged.atoms.size() == 1);
  CHECK(merged.table.logAt({0}) == doctest::Approx(std::log(1.0)));
  CHECK(merged.table.logAt({1}) == doctest::Approx(std::log(5.0)));
  const Parfactor& distinct = m.parfactors[1];
  CHECK(distinct.atoms.size() == 2);
  CHECK(distinct.hasConstraint(0, 1));
}

TEST_CASE("shatter drops partitions that would duplicate an object in an atom") {
  ParfactorModel m = shatter(parse_model(
      "domain d = 3\npredicate r(d, d)\nparfactor r(X,Y) values [1.0, 2.0]"));
  REQUIRE(m.parfactors.size() == 1);
  CHECK(m.parfactors[0].hasConstraint(0, 1));
}

TEST_CASE("grounding counts injective substitutions") {
  ParfactorModel pq = shatter(parse_model(bench::kPq));
  GroundMrf mrf = ground(pq);
  CHECK(mrf.factors.size() == 4 * 3);
  CHECK(mrf.vars.size() == 8);

  ParfactorModel fs = shatter(parse_model(bench::kFriendsSmokers));
  GroundMrf fsm = ground(fs);
  CHECK(fsm.factors.size() == 3 * 2);
  CHECK(fsm.vars.size() == 3 + 6);
}

TEST_CASE("grounding fails when the domain cannot host the distinct lvars") {
  ParfactorModel m = parse_model(bench::kChain);
  for (DomainDecl& d : m.domains) d.size = 3;
  CHECK_THROWS_AS(ground(shatter(m)), Error);
}

TEST_CASE("exact marginal matches a hand enumeration") {
  ParfactorModel m = parse_model(
      "domain d = 1\npredicate a(d)\npredicate b(d)\npredicate c(d)\n"
      "parfactor a(X), b(X) values [2.0, 1.0, 1.0, 3.0]\n"
      "parfactor b(X), c(X) values [1.0, 2.0, 2.0, 1.0]");
  GroundMrf mrf = ground(shatter(m));
  // Enumerate the 8 joint states with plain doubles.
  double f1[2][2] = {{2, 1}, {1, 3}};
  double f2[2][2] = {{1, 2}, {2, 1}};
  double pb[2] = {0, 0}, z = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        double w = f1[a][b] * f2[b][c];
        pb[b] += w;
        z += w;
      }
    }
  }
  FactorTable marg = exact_marginal(mrf, {GroundAtom{1, {1}}});
  CHECK(std::exp(marg.logValues()[0]) == doctest::Approx(pb[0] / z).epsilon(1e-12));
  CHECK(std::exp(marg.logValues()[1]) == doctest::Approx(pb[1] / z).epsilon(1e-12));
}

TEST_CASE("exact marginal refuses oversized state spaces") {
  ParfactorModel m = shatter(parse_model(bench::kPq));
  GroundMrf mrf = ground(m);
  CHECK_THROWS_AS(exact_marginal(mrf, {GroundAtom{0, {1}}}, 4), Error);
}
