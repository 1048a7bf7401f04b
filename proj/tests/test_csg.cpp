#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "bench_models.hpp"
#include "doctest.h"
#include "lgbp/csg.hpp"
#include "lgbp/model.hpp"

using namespace lgbp;

namespace {

struct Fixture {
  ParfactorModel fs = parse_model(bench::kFriendsSmokers);
  std::vector<std::string> preds = fs.predicateNames();  // smokes, friends

  GroundAtom sm(int i) { return {0, {i}}; }
  GroundAtom fr(int i, int j) { return {1, {i, j}}; }
};

std::string formOf(const ParfactorModel& m, const std::vector<GroundAtom>& cluster) {
  Csg g = build_csg(cluster, m.predicateNames());
  return canonize(g, m).first.canonForm;
}

}  // namespace

TEST_CASE("unary atoms become self-edges, binary atoms directed edges") {
  Fixture f;
  Csg g = build_csg({f.sm(1), f.sm(2), f.fr(1, 2)}, f.preds);
  CHECK(g.nodes == std::vector<int>{1, 2});
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[0] == CsgEdge{1, 1, "smokes"});
  CHECK(g.edges[1] == CsgEdge{1, 2, "friends"});
  CHECK(g.edges[2] == CsgEdge{2, 2, "smokes"});
}

TEST_CASE("canonization is label-invariant") {
  Fixture f;
  std::string a = formOf(f.fs, {f.sm(1), f.sm(2), f.fr(1, 2)});
  std::string b = formOf(f.fs, {f.sm(3), f.sm(5), f.fr(3, 5)});
  std::string c = formOf(f.fs, {f.sm(2), f.sm(1), f.fr(2, 1)});
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("canonization distinguishes edge direction relative to colors") {
  Fixture f;
  // smokes on the friendship source vs on the target.
  std::string src = formOf(f.fs, {f.sm(1), f.fr(1, 2)});
  std::string dst = formOf(f.fs, {f.sm(2), f.fr(1, 2)});
  CHECK(src != dst);
}

TEST_CASE("canonization is idempotent and uses labels 1..n") {
  Fixture f;
  Csg g = build_csg({f.sm(7), f.fr(7, 3)}, f.preds);
  auto [canon, mapping] = canonize(g, f.fs);
  Csg g2 = build_csg(canon.atoms, f.preds);
  auto [canon2, mapping2] = canonize(g2, f.fs);
  CHECK(canon.canonForm == canon2.canonForm);
  CHECK(canon.atoms == canon2.atoms);
  CHECK(g2.nodes == std::vector<int>{1, 2});
}

TEST_CASE("different predicates never share a canonical form") {
  ParfactorModel fk = parse_model(bench::kFriendsKnows);
  std::string frForm = formOf(fk, {GroundAtom{0, {1, 2}}});
  std::string knForm = formOf(fk, {GroundAtom{1, {1, 2}}});
  CHECK(frForm != knForm);
}

TEST_CASE("automorphism counts of the benchmark clusters") {
  Fixture f;
  auto autCount = [&](const ParfactorModel& m, const std::vector<GroundAtom>& cluster) {
    Csg g = build_csg(cluster, m.predicateNames());
    return enumerate_isomorphisms(g, g).size();
  };
  ParfactorModel pp = parse_model(bench::kPp);
  CHECK(autCount(pp, {GroundAtom{0, {1}}, GroundAtom{0, {2}}}) == 2);
  CHECK(autCount(f.fs, {f.sm(1), f.sm(2), f.fr(1, 2)}) == 1);

  ParfactorModel tr = parse_model(bench::kTransitive);
  auto r = [](int i, int j) { return GroundAtom{0, {i, j}}; };
  CHECK(autCount(tr, {r(1, 2), r(2, 3), r(1, 3)}) == 1);
  ParfactorModel ch = parse_model(bench::kChain);
  CHECK(autCount(ch, {r(1, 2), r(2, 3), r(3, 4)}) == 1);
  CHECK(autCount(ch, {r(1, 2), r(3, 4)}) == 2);  // swap the two components
}

TEST_CASE("isomorphisms map one cluster onto a relabeled copy") {
  Fixture f;
  Csg g1 = build_csg({f.sm(1), f.sm(2), f.fr(1, 2)}, f.preds);
  Csg g2 = build_csg({f.sm(4), f.sm(9), f.fr(9, 4)}, f.preds);
  auto isos = enumerate_isomorphisms(g1, g2);
  REQUIRE(isos.size() == 1);
  CHECK(isos[0].at(1) == 9);
  CHECK(isos[0].at(2) == 4);
  Csg g3 = build_csg({f.sm(4), f.fr(9, 4)}, f.preds);
  CHECK(enumerate_isomorphisms(g1, g3).empty());
}

TEST_CASE("partial maps extend to automorphisms only when symmetry allows") {
  ParfactorModel pp = parse_model(bench::kPp);
  Csg sym = build_csg({GroundAtom{0, {1}}, GroundAtom{0, {2}}}, pp.predicateNames());
  CHECK(extends_to_automorphism(sym, {{1, 2}}));
  Fixture f;
  Csg asym = build_csg({f.sm(1), f.sm(2), f.fr(1, 2)}, f.preds);
  CHECK(extends_to_automorphism(asym, {{1, 1}}));
  CHECK(!extends_to_automorphism(asym, {{1, 2}}));
  CHECK(!extends_to_automorphism(asym, {{1, 7}}));
}
