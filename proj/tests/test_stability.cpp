#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "robench/error.hpp"
#include "robench/stability.hpp"

using namespace robench;

namespace {

LadderAccuracies single(DistortionKind kind, double a_ref, std::vector<double> as) {
  LadderAccuracies l{kind, a_ref, {{}}};
  int level = 1;
  for (double a : as) l.chains[0].push_back({level, static_cast<double>(level), a}), ++level;
  return l;
}

// Direct evaluation of 1 - sqrt(mean(omega*PD + (1-omega)*PM)).
double oracle(const LadderAccuracies& l, double omega) {
  double sum = 0.0;
  int n = 0;
  for (const auto& chain : l.chains) {
    double prev = l.a_ref;
    for (const auto& e : chain) {
      double pd = l.a_ref == 0.0 ? (e.accuracy == 0.0 ? 0.0 : 1.0)
                                 : std::pow((e.accuracy - l.a_ref) / l.a_ref, 2.0);
      double pm = 0.0;
      if (e.accuracy > prev) pm = prev == 0.0 ? 1.0 : std::pow((e.accuracy - prev) / prev, 2.0);
      sum += omega * std::min(pd, 1.0) + (1.0 - omega) * std::min(pm, 1.0);
      prev = e.accuracy;
      ++n;
    }
  }
  return 1.0 - std::sqrt(sum / n);
}

LadderAccuracies random_ladder(gen::Rng& r, DistortionKind kind) {
  LadderAccuracies l{kind, r.uniform(), {}};
  const int chains = kind == DistortionKind::bv ? 2 : 1;
  int level = 1;
  for (int c = 0; c < chains; ++c) {
    l.chains.emplace_back();
    const int n = r.integer(chains == 2 ? 0 : 1, 12);
    for (int i = 0; i < n; ++i) l.chains.back().push_back({level, level * 1.0, r.uniform()}), ++level;
  }
  if (l.n_x() == 0) l.chains.back().push_back({level, level * 1.0, r.uniform()});
  return l;
}

}  // namespace

TEST_CASE("worked penalty examples") {
  CHECK(std::abs(degradation_penalty(0.25, 0.5) - 0.25) < 1e-12);
  CHECK(std::abs(monotonicity_penalty(0.55, 0.5) - 0.01) < 1e-12);
  CHECK(monotonicity_penalty(0.45, 0.5) == 0.0);
  CHECK(monotonicity_penalty(0.5, 0.5) == 0.0);
  const auto s = stability(single(DistortionKind::qp, 0.8, {0.8, 0.4}), 0.8).s;
  CHECK(std::abs(s - (1.0 - std::sqrt(0.1))) < 1e-12);
}

TEST_CASE("penalties clamp at one") {
  CHECK(degradation_penalty(1.0, 0.1) == 1.0);
  CHECK(monotonicity_penalty(0.9, 0.2) == 1.0);
  CHECK(degradation_penalty(0.0, 0.0) == 0.0);
  CHECK(degradation_penalty(0.3, 0.0) == 1.0);
  CHECK(monotonicity_penalty(0.3, 0.0) == 1.0);
  CHECK(monotonicity_penalty(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(degradation_penalty(1.2, 0.5), ArgumentError);
  CHECK_THROWS_AS(monotonicity_penalty(0.5, -0.1), ArgumentError);
}

TEST_CASE("ideal detector is perfectly stable") {
  gen::Rng r(1000);
  for (int i = 0; i < 1000; ++i) {
    const double a = r.uniform();
    for (auto kind : kAllKinds) {
      auto l = random_ladder(r, kind);
      l.a_ref = a;
      for (auto& c : l.chains)
        for (auto& e : c) e.accuracy = a;
      CHECK(stability(l, r.uniform()).s == 1.0);
    }
  }
}

TEST_CASE("stability matches the direct formula and stays in [0,1]") {
  gen::Rng r(42);
  for (int i = 0; i < 2000; ++i) {
    const auto kind = kAllKinds[r.integer(0, 3)];
    const auto l = random_ladder(r, kind);
    const double omega = r.uniform();
    const double s = stability(l, omega).s;
    CHECK(s == doctest::Approx(oracle(l, omega)).epsilon(1e-12));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("monotone decay is penalised only through degradation") {
  gen::Rng r(8);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> as;
    double a = r.uniform(0.5, 1.0);
    const double a_ref = a;
    for (int k = 0; k < 10; ++k) as.push_back(a *= r.uniform(0.6, 1.0));
    const auto res = stability(single(DistortionKind::wn, a_ref, as), 0.3);
    for (const auto& p : res.breakdown.levels) CHECK(p.pm == 0.0);
    // Full weight on degradation can only lower the score further.
    CHECK(stability(single(DistortionKind::wn, a_ref, as), 1.0).s <= res.s);
  }
}

TEST_CASE("each brightness chain starts from the reference") {
  LadderAccuracies l{DistortionKind::bv, 0.5, {{{1, -0.1, 0.4}}, {{2, 0.1, 0.6}}}};
  const auto r = stability(l, 0.5);
  REQUIRE(r.breakdown.levels.size() == 2);
  CHECK(r.breakdown.levels[0].pm == 0.0);
  CHECK(r.breakdown.levels[1].pm == doctest::Approx(0.04));
  CHECK(r.breakdown.levels[1].pd == doctest::Approx(0.04));
}

TEST_CASE("ladder ordering") {
  const std::vector<LadderEntry> qp{{1, 40, 0.2}, {2, 10, 0.9}, {3, 25, 0.5}};
  const auto q = order_ladder(DistortionKind::qp, 0.9, qp);
  REQUIRE(q.chains.size() == 1);
  CHECK(q.chains[0][0].param == 10);
  CHECK(q.chains[0][2].param == 40);

  const std::vector<LadderEntry> res{{1, 0.5, 0.2}, {2, 1.0, 0.9}, {3, 0.75, 0.5}};
  const auto rs = order_ladder(DistortionKind::res, 0.9, res);
  CHECK(rs.chains[0][0].param == 1.0);
  CHECK(rs.chains[0][2].param == 0.5);

  const std::vector<LadderEntry> bv{{1, 0.3, 0.2}, {2, -0.1, 0.9}, {3, 0.1, 0.5}, {4, -0.4, 0.1}};
  const auto b = order_ladder(DistortionKind::bv, 0.9, bv);
  REQUIRE(b.chains.size() == 2);
  CHECK(b.chains[0][0].param == -0.1);
  CHECK(b.chains[0][1].param == -0.4);
  CHECK(b.chains[1][0].param == 0.1);
  CHECK(b.chains[1][1].param == 0.3);

  const std::vector<LadderEntry> dup{{1, 10, 0.2}, {2, 10, 0.3}};
  CHECK_THROWS_AS(order_ladder(DistortionKind::qp, 0.9, dup), ArgumentError);
  const std::vector<LadderEntry> zero{{1, 0.0, 0.2}};
  CHECK_THROWS_AS(order_ladder(DistortionKind::bv, 0.9, zero), ArgumentError);
}

TEST_CASE("stability result does not depend on entry order") {
  gen::Rng r(17);
  for (int i = 0; i < 200; ++i) {
    std::vector<LadderEntry> e;
    const int n = r.integer(1, 10);
    for (int k = 0; k < n; ++k) e.push_back({k + 1, 5.0 * (k + 1), r.uniform()});
    auto shuffled = e;
    for (std::size_t k = shuffled.size(); k > 1; --k)
      std::swap(shuffled[k - 1], shuffled[static_cast<std::size_t>(r.integer(0, static_cast<int>(k) - 1))]);
    const double a_ref = r.uniform();
    CHECK(stability(order_ladder(DistortionKind::qp, a_ref, e)).s ==
          stability(order_ladder(DistortionKind::qp, a_ref, shuffled)).s);
  }
}

TEST_CASE("invalid ladders") {
  CHECK_THROWS_AS(stability(LadderAccuracies{DistortionKind::qp, 0.5, {}}), ArgumentError);
  CHECK_THROWS_AS(stability(LadderAccuracies{DistortionKind::qp, 0.5, {{}}}), ArgumentError);
  CHECK_THROWS_AS(stability(LadderAccuracies{DistortionKind::bv, 0.5, {{{1, 0.1, 0.5}}}}),
                  ArgumentError);
  CHECK_THROWS_AS(stability(single(DistortionKind::qp, 0.5, {1.5})), ArgumentError);
  CHECK_THROWS_AS(stability(single(DistortionKind::qp, 0.5, {0.5}), 1.5), ArgumentError);
}

TEST_CASE("stability vector needs every kind once") {
  std::vector<LadderAccuracies> ls;
  for (auto k : kAllKinds)
    ls.push_back(k == DistortionKind::bv
                     ? LadderAccuracies{k, 0.8, {{{1, -0.1, 0.4}}, {{2, 0.1, 0.8}}}}
                     : single(k, 0.8, {0.8, 0.4}));
  const auto v = stability_vector(ls, 0.8);
  CHECK(v.qp == doctest::Approx(1.0 - std::sqrt(0.1)));
  CHECK(v.bv == doctest::Approx(1.0 - std::sqrt(0.1)));
  auto missing = ls;
  missing.pop_back();
  CHECK_THROWS_AS(stability_vector(missing), ArgumentError);
  auto twice = ls;
  twice.push_back(ls[0]);
  CHECK_THROWS_AS(stability_vector(twice), ArgumentError);
}

TEST_CASE("stability report round trip") {
  gen::Rng r(23);
  std::vector<LadderAccuracies> ls;
  const double a_ref = r.uniform();
  for (auto k : kAllKinds) {
    auto l = random_ladder(r, k);
    l.a_ref = a_ref;
    if (k == DistortionKind::bv) {  // offsets carry their chain's sign
      for (auto& e : l.chains[0]) e.param = -e.param;
    }
    if (k == DistortionKind::res) {  // scales shrink along the ladder
      for (auto& e : l.chains[0]) e.param = 1.0 / (e.level + 1);
    }
    ls.push_back(l);
  }
  const auto j = stability_report_json("det", ls, 0.7);
  const auto back = ladders_from_report_json(j);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(stability(back[i], 0.7).s == stability(ls[i], 0.7).s);
    CHECK(j["per_kind"][std::string(to_string(ls[i].kind))]["s"].get<double>() ==
          stability(ls[i], 0.7).s);
  }
}
