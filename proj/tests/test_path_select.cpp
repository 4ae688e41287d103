#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"

using namespace mmris;
using testing_support::ScenarioBuilder;

namespace {

// BS → RIS 1 (4×5) → user, 10 m then 5 m, straight through the panel's front.
Scenario one_hop(double ref_gain, int m0 = 1) {
  ScenarioBuilder b(m0);
  b.s.ref_gain = ref_gain;
  b.ris({10, 0, 0}, {-1, 0, 0}, 4, 5).user({10 - 3, 4, 0});
  return b.build();
}

ReflectionPath path_of(int user, std::vector<int> seq) {
  ReflectionPath p;
  p.user = user;
  p.ris_sequence = std::move(seq);
  return p;
}

CVector random_unit_phasors(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  CVector rho(m);
  for (int i = 0; i < m; ++i) rho(i) = std::polar(1.0, u(rng));
  return rho;
}

double alignment(const PhaseConfig& cfg, const CVector& rho) {
  return std::abs(cfg.coefficients().dot(rho));
}

}  // namespace

TEST(PhaseContinuous, AlignsEveryElement) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto [s, p] = testing_support::random_chain(rng, 1 + trial % 4);
    if (!is_valid_path(p, s)) continue;
    for (int n = 1; n <= p.hops(); ++n) {
      const PhaseConfig cfg = optimal_phase_continuous(p, n, s);
      const CVector rho = hop_alignment_vector(p, n, s);
      const double m = s.node(p.ris_sequence[static_cast<std::size_t>(n - 1)]).elements();
      EXPECT_NEAR(alignment(cfg, rho), m, 1e-9 * m);
      for (double th : cfg.phases) {
        EXPECT_GE(th, 0.0);
        EXPECT_LT(th, kTwoPi);
      }
    }
  }
}

TEST(PhaseContinuous, HopAmplitudeExample) {
  // |A|² = β0 M² / d² for the incoming hop at 10 m with M = 20
  const Scenario s = one_hop(2.2797e-5);
  const EffectiveChannel h = cascade_channel(path_of(1, {1}), PhaseMode::continuous(), s);
  const double last = s.distance(1, 2);
  EXPECT_NEAR(h.gain * last * last / s.ref_gain, 9.1188e-5, 1e-4 * 9.1188e-5);
}

TEST(PhaseContinuous, ZeroAnglesGiveZeroPhases) {
  const PhaseConfig cfg = phases_from_alignment(3, CVector::Ones(6));
  ASSERT_EQ(cfg.phases.size(), 6u);
  for (double th : cfg.phases) EXPECT_EQ(th, 0.0);
  EXPECT_FALSE(cfg.bits.has_value());
}

TEST(PhaseDiscrete, OneBitExample) {
  EXPECT_EQ(quantize_phase(0.4 * kPi, 1), 0.0);
  EXPECT_DOUBLE_EQ(quantize_phase(0.6 * kPi, 1), kPi);
  EXPECT_EQ(quantize_phase(0.5 * kPi, 1), 0.0);  // tie goes to the smaller angle
  EXPECT_EQ(quantize_phase(1.9 * kPi, 1), 0.0);
}

TEST(PhaseDiscrete, TwoBitCodebook) {
  std::set<double> seen;
  for (int i = 0; i < 400; ++i) seen.insert(quantize_phase(kTwoPi * i / 400.0 + 0.001, 2));
  const std::set<double> want{0.0, kPi / 2, kPi, 3 * kPi / 2};
  EXPECT_EQ(seen, want);
}

TEST(PhaseDiscrete, ErrorBoundAndCodebookMembership) {
  std::mt19937_64 rng(8);
  for (int b = 1; b <= 12; ++b) {
    const CVector rho = random_unit_phasors(rng, 30);
    const PhaseConfig cfg = quantized_phases(1, rho, b, false);
    ASSERT_EQ(cfg.bits, b);
    const double step = kTwoPi / (1 << b);
    for (Eigen::Index m = 0; m < rho.size(); ++m) {
      const double th = cfg.phases[static_cast<std::size_t>(m)];
      EXPECT_LE(circular_distance(th, std::arg(rho(m))), kPi / (1 << b) + 1e-12);
      const double level = th / step;
      EXPECT_NEAR(level, std::round(level), 1e-9);
      EXPECT_GE(th, 0.0);
      EXPECT_LT(th, kTwoPi);
    }
  }
  EXPECT_THROW(quantized_phases(1, CVector::Ones(3), 0, false), std::invalid_argument);
}

TEST(PhaseDiscrete, GainBelowContinuousAndImprovesWithBitsOnAverage) {
  std::mt19937_64 rng(2024);
  const int draws = 200, m = 20;
  std::vector<double> mean(8, 0.0);
  for (int d = 0; d < draws; ++d) {
    const CVector rho = random_unit_phasors(rng, m);
    for (int b = 1; b <= 7; ++b) {
      const double g = alignment(quantized_phases(1, rho, b, false), rho);
      EXPECT_LE(g, m + 1e-9);
      mean[static_cast<std::size_t>(b)] += g / draws;
    }
  }
  for (int b = 1; b < 7; ++b) EXPECT_GE(mean[static_cast<std::size_t>(b + 1)], mean[static_cast<std::size_t>(b)]);
}

TEST(PhaseDiscrete, RotationRefineNeverWorse) {
  std::mt19937_64 rng(99);
  for (int d = 0; d < 100; ++d) {
    const CVector rho = random_unit_phasors(rng, 16);
    for (int b = 1; b <= 3; ++b)
      EXPECT_GE(alignment(quantized_phases(1, rho, b, true), rho) + 1e-12,
                alignment(quantized_phases(1, rho, b, false), rho));
  }
}

TEST(LinkWeight, RisExample) {
  ScenarioBuilder b;
  b.s.ref_gain = 2.2797e-5;
  b.ris({10, 0, 0}, {-1, 0, 0}, 4, 5);
  EXPECT_NEAR(link_weight(0, 1, b.build()), 9.3026, 1e-4);
}

TEST(LinkWeight, UserExample) {
  ScenarioBuilder b;
  b.s.ref_gain = 2.2797e-5;
  b.ris({10, 0, 0}, {-1, 0, 0}, 4, 5).user({5, 0, 0});
  EXPECT_NEAR(link_weight(1, 2, b.build()), 13.908, 1e-3);
}

TEST(LinkWeight, PositiveAndRequiresLos) {
  ScenarioBuilder b;
  b.s.ref_gain = 1.0;
  b.ris({1e-4, 0, 0}, {-1, 0, 0}, 8, 8).user({5, 0, 0}).user({-5, 0, 0});
  const Scenario s = b.build();
  EXPECT_GT(link_weight(0, 1, s), 0.0);
  EXPECT_THROW(link_weight(1, 2, s), PreconditionError);
}

TEST(ConnectionGraph, OnlyForcedChain) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).ris({5, 3, 0}, {-1, 0, 0}, 2, 2).user({1, 2, 0});
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) b.s.visibility.set_override(i, j, false);
  b.s.visibility.set_override(0, 1, true);
  b.s.visibility.set_override(1, 3, true);
  const Scenario s = b.build();
  const ConnectionGraph g = build_connection_graph(s);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_TRUE(g.weight(0, 1).has_value());
  EXPECT_TRUE(g.weight(1, 3).has_value());
  const auto p = best_path(1, g, s);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->ris_sequence, std::vector<int>{1});
}

TEST(ConnectionGraph, RisPairHasTwoDirectedEdges) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {0, 1, 0}, 2, 2).ris({5, 6, 0}, {0, -1, 0}, 3, 4);
  const Scenario s = b.build();
  const ConnectionGraph g = build_connection_graph(s);
  ASSERT_TRUE(g.weight(1, 2) && g.weight(2, 1));
  EXPECT_NE(*g.weight(1, 2), *g.weight(2, 1));
  EXPECT_FALSE(g.weight(1, 0).has_value());
}

TEST(ConnectionGraph, NoVisibilityNoEdges) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).user({1, 2, 0}).user({2, 2, 0});
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) b.s.visibility.set_override(i, j, false);
  const Scenario s = b.build();
  const ConnectionGraph g = build_connection_graph(s);
  EXPECT_EQ(g.num_edges(), 0u);
  EXPECT_FALSE(best_path(1, g, s).has_value());
}

TEST(ConnectionGraph, NoDirectBsToUserEdge) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).user({1, 2, 0});
  const ConnectionGraph g = build_connection_graph(b.build());
  EXPECT_FALSE(g.weight(0, 2).has_value());
}

TEST(BestPath, PicksLighterTwoHopRoute) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).ris({5, 3, 0}, {-1, 0, 0}, 2, 2).user({1, 2, 0});
  const Scenario s = b.build();
  ConnectionGraph g;
  g.out.resize(4);
  g.out[0] = {{1, 9.30}, {2, 9.80}};
  g.out[1] = {{3, 13.91}};
  g.out[2] = {{3, 13.50}};
  const auto p = best_path(1, g, s);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->ris_sequence, std::vector<int>{1});
  EXPECT_NEAR(p->total_weight, 23.21, 1e-12);
}

TEST(BestPath, EqualWeightsBreakLexicographically) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).ris({5, 3, 0}, {-1, 0, 0}, 2, 2).user({1, 2, 0});
  const Scenario s = b.build();
  ConnectionGraph g;
  g.out.resize(4);
  g.out[0] = {{1, 2.0}, {2, 1.0}};
  g.out[1] = {{3, 1.0}};
  g.out[2] = {{3, 2.0}};
  const auto p = best_path(1, g, s);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->ris_sequence, std::vector<int>{1});
}

TEST(BestPath, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(7);
  int users = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int j = 2 + trial % 7;
    const Scenario s = testing_support::random_override_scenario(rng, j, 3, 0.45);
    const ConnectionGraph g = build_connection_graph(s);
    for (int k = 1; k <= s.num_users(); ++k) {
      const auto brute = testing_support::brute_force_best_path(k, s);
      const auto got = best_path(k, g, s);
      ASSERT_EQ(got.has_value(), brute.found());
      if (!got) continue;
      EXPECT_EQ(got->total_weight, brute.weight);
      EXPECT_EQ(got->vertices(s), brute.vertices);
      EXPECT_TRUE(is_valid_path(*got, s));
      ++users;
    }
  }
  EXPECT_GT(users, 60);
}

TEST(BestPath, HopCapMatchesCappedEnumeration) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing_support::random_override_scenario(rng, 7, 2, 0.5);
    const ConnectionGraph g = build_connection_graph(s);
    for (int cap = 1; cap <= 3; ++cap)
      for (int k = 1; k <= s.num_users(); ++k) {
        const auto brute = testing_support::brute_force_best_path(k, s, cap);
        const auto got = best_path(k, g, s, cap);
        ASSERT_EQ(got.has_value(), brute.found());
        if (!got) continue;
        EXPECT_LE(got->hops(), cap);
        EXPECT_EQ(got->total_weight, brute.weight);
        EXPECT_EQ(got->vertices(s), brute.vertices);
      }
  }
}

TEST(BestPath, ShippedScenarioMatchesEnumerationWithinFourHops) {
  const Scenario s = load_scenario(testing_support::scenario_path("paper16.json"));
  const ConnectionGraph g = build_connection_graph(s);
  for (int k = 1; k <= s.num_users(); ++k) {
    const auto brute = testing_support::brute_force_best_path(k, s, 4);
    const auto got = best_path(k, g, s, 4);
    ASSERT_TRUE(got.has_value()) << "user " << k;
    EXPECT_EQ(got->total_weight, brute.weight) << "user " << k;
    EXPECT_EQ(got->vertices(s), brute.vertices) << "user " << k;
    const auto free = best_path(k, g, s);
    EXPECT_LE(free->total_weight, got->total_weight);
  }
}

TEST(BestPath, AddingAnEdgeNeverHurts) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    Scenario s = testing_support::random_override_scenario(rng, 6, 3, 0.35);
    const ConnectionGraph g = build_connection_graph(s);
    std::vector<std::pair<int, int>> hidden;
    for (const auto& [key, visible] : s.visibility.overrides)
      if (!visible) hidden.push_back(key);
    if (hidden.empty()) continue;
    const auto [a, c] = hidden[std::uniform_int_distribution<std::size_t>(0, hidden.size() - 1)(rng)];
    Scenario more = s;
    more.visibility.set_override(a, c, true);
    const ConnectionGraph g2 = build_connection_graph(more);
    for (int k = 1; k <= s.num_users(); ++k) {
      const auto before = best_path(k, g, s);
      const auto after = best_path(k, g2, more);
      if (before) {
        ASSERT_TRUE(after.has_value());
        EXPECT_LE(after->total_weight, before->total_weight);
      }
    }
  }
}

TEST(ValidPath, RejectsLoopsAndBrokenLinks) {
  ScenarioBuilder b;
  b.ris({5, 0, 0}, {-1, 0, 0}, 2, 2).ris({2, 4, 0}, {1, -1, 0}, 2, 2).user({1, 1, 0});
  const Scenario s = b.build();
  EXPECT_TRUE(is_valid_path(path_of(1, {1}), s));
  EXPECT_TRUE(is_valid_path(path_of(1, {1, 2}), s));
  EXPECT_FALSE(is_valid_path(path_of(1, {1, 2, 1}), s));
  EXPECT_FALSE(is_valid_path(path_of(1, {}), s));
  EXPECT_FALSE(is_valid_path(path_of(1, {3}), s));
  EXPECT_FALSE(is_valid_path(path_of(2, {1}), s));
  EXPECT_THROW(hop_alignment_vector(path_of(1, {1}), 2, s), std::invalid_argument);
}

TEST(Cascade, OneHopExample) {
  ScenarioBuilder b(4);
  b.s.ref_gain = 1e-4;
  b.ris({10, 0, 0}, {-1, 0, 0}, 2, 4).user({10 - 3, 4, 0});
  const Scenario s = b.build();
  const EffectiveChannel h = cascade_channel(path_of(1, {1}), PhaseMode::continuous(), s);
  EXPECT_EQ(h.row.size(), 4);
  EXPECT_NEAR(h.gain, 1.024e-9, 1.024e-9 * 1e-9);
}

TEST(Cascade, ClosedFormCollinearityAndQuantization) {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto [s, p] = testing_support::random_chain(rng, 1 + trial % 4);
    if (!is_valid_path(p, s)) continue;
    const EffectiveChannel cont = cascade_channel(p, PhaseMode::continuous(), s);
    const double closed = closed_form_gain(p, s);
    EXPECT_NEAR(cont.gain / closed, 1.0, 1e-9);

    const CVector a = bs_array_response(bs_departure_angle(s, p.ris_sequence.front()), s);
    const double cosine = std::abs((cont.row * a)(0)) / (cont.row.norm() * a.norm());
    EXPECT_GT(cosine, 1.0 - 1e-9);

    const EffectiveChannel fine = cascade_channel(p, PhaseMode::discrete(30), s);
    EXPECT_NEAR(fine.gain / cont.gain, 1.0, 1e-9);
    for (int bits = 1; bits <= 3; ++bits)
      EXPECT_LE(cascade_channel(p, PhaseMode::discrete(bits), s).gain, cont.gain * (1 + 1e-12));
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(Cascade, DirectChannelNorm) {
  ScenarioBuilder b(6);
  b.s.ref_gain = 2e-5;
  b.user({3, 4, 0});
  b.s.visibility.obstacles.push_back({{1, 1, -1}, {2, 2, 1}});
  const Scenario s = b.build();
  const EffectiveChannel h = direct_channel(1, s);
  EXPECT_NEAR(h.gain, 6 * 2e-5 / 25.0, 1e-18);
}
