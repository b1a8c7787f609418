#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "gzsl/fusion.hpp"

using namespace gzsl;

namespace {

const ClassCatalog kCatalog({0, 1}, {2, 3, 4});

std::vector<double> random_scores(std::size_t n, std::mt19937_64& rng,
                                  double scale = 2.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

}  // namespace

TEST_CASE("embed_branch places subset scores at catalog positions") {
  ClassCatalog catalog({0}, {1});
  const std::vector<double> unseen_scores = {1.0};
  const auto with_inf =
      embed_branch(unseen_scores, catalog.unseen_ids(), catalog, kNegInf);
  REQUIRE(with_inf.size() == 2);
  CHECK(with_inf[0] == kNegInf);
  CHECK(with_inf[1] == 1.0);

  const auto with_zero =
      embed_branch(unseen_scores, catalog.unseen_ids(), catalog, 0.0);
  CHECK(with_zero == std::vector<double>{0.0, 1.0});

  const std::vector<double> all = {0.5, -0.5};
  CHECK(embed_branch(all, catalog.all_ids(), catalog, kNegInf) == all);

  const std::vector<ClassId> unknown = {9};
  CHECK_THROWS_AS(embed_branch(unseen_scores, unknown, catalog, 0.0), Error);
}

TEST_CASE("fuse_2way routes the boundary to the seen branch") {
  const std::vector<double> g_s = {0.1, 0.2};
  const std::vector<double> g_u = {5.0, 4.0, 3.0};
  const auto at_zero = fuse_2way(0.0, g_s, g_u, kCatalog);
  CHECK(at_zero.branch_taken == Branch::Seen);
  CHECK(at_zero.prediction_index() < kCatalog.num_seen());

  const auto below = fuse_2way(-0.01, std::vector<double>{9.0, 9.0},
                               std::vector<double>{2.0, 1.0, 0.0}, kCatalog);
  CHECK(below.branch_taken == Branch::Unseen);
  CHECK(kCatalog.all_ids()[below.prediction_index()] == 2);
}

TEST_CASE("fuse_2way agrees with direct case evaluation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> s_dist(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double s = s_dist(rng);
    const auto g_s = random_scores(2, rng);
    const auto g_u = random_scores(3, rng);
    const auto fused = fuse_2way(s, g_s, g_u, kCatalog);

    // Independent re-evaluation of the dichotomy.
    ClassId expected;
    if (s >= 0.0) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < g_s.size(); ++i)
        if (g_s[i] > g_s[best]) best = i;
      expected = kCatalog.seen_ids()[best];
    } else {
      std::size_t best = 0;
      for (std::size_t i = 1; i < g_u.size(); ++i)
        if (g_u[i] > g_u[best]) best = i;
      expected = kCatalog.unseen_ids()[best];
    }
    CHECK(kCatalog.all_ids()[fused.prediction_index()] == expected);
    CHECK((fused.branch_taken == Branch::Seen) == (s >= 0.0));
  }
}

TEST_CASE("sigmoid domain probability") {
  CHECK(sigmoid_domain_prob(0.0, 0.5) == 0.5);
  CHECK(sigmoid_domain_prob(0.0, 100.0) == 0.5);
  CHECK(sigmoid_domain_prob(std::log(3.0), 1.0) == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(sigmoid_domain_prob(0.1, 1e3) == Catch::Approx(1.0).margin(1e-12));
  // No overflow at |sigma * s| = 1e4 in either direction.
  CHECK(sigmoid_domain_prob(1.0, 1e4) == 1.0);
  CHECK(sigmoid_domain_prob(-1.0, 1e4) == 0.0);
  CHECK_THROWS_AS(sigmoid_domain_prob(0.0, 0.0), Error);
  CHECK_THROWS_AS(sigmoid_domain_prob(0.0, -1.0), Error);
}

TEST_CASE("sigmoid probability is strictly monotone before saturation") {
  const double sigma = 3.0;
  double prev = sigmoid_domain_prob(-9.0, sigma);
  for (double s = -8.5; s <= 9.0; s += 0.5) {
    const double p = sigmoid_domain_prob(s, sigma);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("fuse_2way_sa degenerates to one branch at p_s = 1") {
  std::mt19937_64 rng(5);
  const auto g_s = random_scores(2, rng);
  const auto g_u = random_scores(3, rng);
  const auto fused = fuse_2way_sa(1.0, g_s, g_u, kCatalog);
  std::size_t best_seen = g_s[0] > g_s[1] ? 0 : 1;
  CHECK(fused.prediction_index() == best_seen);
  CHECK(fused.branch_taken == Branch::Mixed);
  for (std::size_t i = kCatalog.num_seen(); i < kCatalog.num_classes(); ++i)
    CHECK(fused.values[i] == 0.0);
}

TEST_CASE("fuse_2way_sa mixes uniform branch posteriors") {
  ClassCatalog catalog({0, 1}, {2, 3, 4, 5});
  const std::vector<double> g_s = {0.0, 0.0};
  const std::vector<double> g_u = {0.0, 0.0, 0.0, 0.0};
  const auto fused = fuse_2way_sa(0.5, g_s, g_u, catalog);
  const std::vector<double> expected = {0.25, 0.25, 0.125, 0.125, 0.125, 0.125};
  REQUIRE(fused.values.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(fused.values[i] == Catch::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("fuse_2way_sa outputs a distribution over the catalog") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p_dist(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto fused = fuse_2way_sa(p_dist(rng), random_scores(2, rng),
                                    random_scores(3, rng), kCatalog);
    double sum = 0.0;
    for (double v : fused.values) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK_THROWS_AS(
      fuse_2way_sa(1.5, std::vector<double>{0, 0}, std::vector<double>{0, 0, 0}, kCatalog),
      Error);
}

TEST_CASE("fuse_2way_sa raw mix places weighted logits") {
  const std::vector<double> g_s = {2.0, -1.0};
  const std::vector<double> g_u = {4.0, 0.0, -4.0};
  const auto fused = fuse_2way_sa(0.25, g_s, g_u, kCatalog, true);
  const std::vector<double> expected = {0.5, -0.25, 3.0, 0.0, -3.0};
  REQUIRE(fused.values.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(fused.values[i] == Catch::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("fuse_3way worked example") {
  ClassCatalog catalog({0, 1}, {2});
  FusionConfig cfg;
  cfg.strategy = Strategy::ThreeWay;
  cfg.c = 1.0;
  cfg.o_s = 0.0;
  cfg.o_u = 0.0;
  const std::vector<double> g_s = {1.0, 0.0};
  const std::vector<double> g_u = {0.0};
  const std::vector<double> g_t = {0.2, 0.5, 0.9};
  const auto fused = fuse_3way(1.0, g_s, g_u, g_t, cfg, catalog);
  REQUIRE(fused.values.size() == 3);
  CHECK(fused.values[0] == Catch::Approx(1.2).epsilon(1e-12));
  CHECK(fused.values[1] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(fused.values[2] == Catch::Approx(0.9).epsilon(1e-12));
  CHECK(catalog.all_ids()[fused.prediction_index()] == 0);
  CHECK(fused.branch_taken == Branch::Seen);
}

TEST_CASE("fuse_3way with a suppressed branch equals the joint scores") {
  std::mt19937_64 rng(13);
  FusionConfig cfg;
  cfg.strategy = Strategy::ThreeWay;
  cfg.c = 0.0;
  cfg.o_s = std::numeric_limits<double>::infinity();
  cfg.o_u = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const auto g_t = random_scores(5, rng);
    const auto fused = fuse_3way(trial % 2 == 0 ? 1.0 : -1.0, random_scores(2, rng),
                                 random_scores(3, rng), g_t, cfg, kCatalog);
    CHECK(fused.values == g_t);
  }
}

TEST_CASE("fuse_3way with a forced branch always predicts inside it") {
  std::mt19937_64 rng(14);
  FusionConfig cfg;
  cfg.strategy = Strategy::ThreeWay;
  cfg.c = 0.0;
  cfg.o_s = -std::numeric_limits<double>::infinity();
  cfg.o_u = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const double s = trial % 2 == 0 ? 0.5 : -0.5;
    const auto fused = fuse_3way(s, random_scores(2, rng), random_scores(3, rng),
                                 random_scores(5, rng), cfg, kCatalog);
    const bool predicted_seen = fused.prediction_index() < kCatalog.num_seen();
    CHECK(predicted_seen == (s >= 0.0));
  }
}

TEST_CASE("fuse_3way agrees with a brute-force evaluation") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> param(-1.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    FusionConfig cfg;
    cfg.strategy = Strategy::ThreeWay;
    cfg.c = std::abs(param(rng));
    cfg.o_s = param(rng);
    cfg.o_u = param(rng);
    const double s = param(rng) - 0.5;
    const auto g_s = random_scores(2, rng);
    const auto g_u = random_scores(3, rng);
    const auto g_t = random_scores(5, rng);
    const auto fused = fuse_3way(s, g_s, g_u, g_t, cfg, kCatalog);

    // Direct evaluation: branch coordinates take
    // max(c * g_t + g_branch - o, g_t); the rest stay at g_t.
    std::vector<double> expected = g_t;
    if (s >= 0.0) {
      for (std::size_t i = 0; i < 2; ++i)
        expected[i] = std::max(cfg.c * g_t[i] + g_s[i] - cfg.o_s, g_t[i]);
    } else {
      for (std::size_t i = 0; i < 3; ++i)
        expected[2 + i] = std::max(cfg.c * g_t[2 + i] + g_u[i] - cfg.o_u, g_t[2 + i]);
    }
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(fused.values[i] == Catch::Approx(expected[i]).margin(1e-12));
  }
}

TEST_CASE("fuse_3way dominates the joint classifier elementwise") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> param(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    FusionConfig cfg;
    cfg.strategy = Strategy::ThreeWay;
    cfg.c = std::abs(param(rng));
    cfg.o_s = param(rng);
    cfg.o_u = param(rng);
    const auto g_t = random_scores(5, rng);
    const auto fused = fuse_3way(param(rng), random_scores(2, rng),
                                 random_scores(3, rng), g_t, cfg, kCatalog);
    for (std::size_t i = 0; i < g_t.size(); ++i) CHECK(fused.values[i] >= g_t[i]);
  }
}

TEST_CASE("raising the branch offset never pulls a prediction onto the branch") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    FusionConfig cfg;
    cfg.strategy = Strategy::ThreeWay;
    cfg.c = 0.5;
    const double s = trial % 2 == 0 ? 1.0 : -1.0;
    const auto g_s = random_scores(2, rng);
    const auto g_u = random_scores(3, rng);
    const auto g_t = random_scores(5, rng);

    bool was_off_branch = false;
    for (double offset : {-1.0, 0.0, 0.5, 1.0, 2.0, 5.0}) {
      cfg.o_s = cfg.o_u = offset;
      const auto fused = fuse_3way(s, g_s, g_u, g_t, cfg, kCatalog);
      const bool on_branch =
          (fused.prediction_index() < kCatalog.num_seen()) == (s >= 0.0);
      if (was_off_branch) CHECK_FALSE(on_branch);
      if (!on_branch) was_off_branch = true;
    }
  }
}

TEST_CASE("fuse dispatch composes the scoring and strategy ops") {
  SelectorModel selector;
  selector.weight = {1.0, 0.0};
  selector.bias = -0.25;
  selector.stats.mean = {0.0, 0.0};
  selector.stats.std_dev = {1.0, 1.0};

  LinearModel m_s, m_u, m_t;
  m_s.class_ids = {0, 1};
  m_s.weights = Matrix(2, 2);
  m_s.weights(0, 0) = 1.0;
  m_s.weights(1, 1) = -0.5;
  m_s.bias = {0.0, 0.1};
  m_u.class_ids = {2, 3, 4};
  m_u.weights = Matrix(2, 3);
  m_u.weights(0, 1) = 0.75;
  m_u.weights(1, 2) = 1.5;
  m_u.bias = {0.2, 0.0, -0.2};
  m_t.class_ids = {0, 1, 2, 3, 4};
  m_t.weights = Matrix(2, 5);
  for (std::size_t k = 0; k < 5; ++k) m_t.weights(k % 2, k) = 0.3 * (k + 1);
  m_t.bias = {0.1, 0.0, -0.1, 0.2, 0.0};

  const std::vector<double> x = {0.6, -1.1};
  const double s = selector_score(selector, x);
  const auto g_s = score_linear(m_s, x);
  const auto g_u = score_linear(m_u, x);

  FusionConfig two;
  two.strategy = Strategy::TwoWay;
  CHECK(fuse(x, selector, m_s, m_u, nullptr, two, kCatalog).values ==
        fuse_2way(s, g_s, g_u, kCatalog).values);

  FusionConfig sa;
  sa.strategy = Strategy::TwoWaySA;
  sa.sigma = 2.5;
  CHECK(fuse(x, selector, m_s, m_u, nullptr, sa, kCatalog).values ==
        fuse_2way_sa(sigmoid_domain_prob(s, 2.5), g_s, g_u, kCatalog).values);

  FusionConfig three;
  three.strategy = Strategy::ThreeWay;
  three.c = 0.5;
  three.o_s = 0.25;
  three.o_u = 0.75;
  const auto g_t = score_linear(m_t, x);
  CHECK(fuse(x, selector, m_s, m_u, &m_t, three, kCatalog).values ==
        fuse_3way(s, g_s, g_u, g_t, three, kCatalog).values);

  // Purity: repeated calls give identical results.
  const auto once = fuse(x, selector, m_s, m_u, &m_t, three, kCatalog);
  const auto again = fuse(x, selector, m_s, m_u, &m_t, three, kCatalog);
  CHECK(once.values == again.values);
  CHECK(once.branch_taken == again.branch_taken);

  CHECK_THROWS_MATCHES(fuse(x, selector, m_s, m_u, nullptr, three, kCatalog), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::config_error;
                       }));
}
