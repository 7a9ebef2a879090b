#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "equibound/bounds.hpp"
#include "equibound/channel.hpp"
#include "equibound/oracle.hpp"
#include "equibound/rng.hpp"

using namespace equibound;

namespace {

constexpr double kLog2_3 = 1.5849625007211562;

}  // namespace

TEST_CASE("numeric oracle frozen values", "[oracle]") {
  REQUIRE_THAT(min_entropy_oracle(1.0, 4), Catch::Matchers::WithinAbs(0.0, 1e-9));
  // p_max = 1/2: two equal atoms, one bit
  REQUIRE_THAT(min_entropy_oracle(0.5, 2), Catch::Matchers::WithinAbs(1.0, 1e-6));
  REQUIRE_THAT(min_entropy_oracle(0.5, 6), Catch::Matchers::WithinAbs(1.0, 1e-6));
  // p_max = 0.4 needs a mixture: the single greedy profile (0.4, 0.4, 0.2)
  // has entropy ~1.522, the optimum mixes supports of sizes 2 and 3
  REQUIRE_THAT(min_entropy_oracle(0.4, 5),
               Catch::Matchers::WithinAbs(0.4 + 0.6 * kLog2_3, 1e-6));
  REQUIRE(min_entropy_oracle(0.4, 5) < 1.52);
  // uniform boundary
  REQUIRE_THAT(min_entropy_oracle(0.25, 4), Catch::Matchers::WithinAbs(2.0, 1e-6));
}

TEST_CASE("numeric oracle tracks the envelope across alphabets", "[oracle]") {
  SplitMix64 rng(555);
  for (int n = 2; n <= 6; ++n) {
    for (int i = 0; i < 10; ++i) {
      const double cap = static_cast<double>(n - 1) / static_cast<double>(n);
      const double eps = cap * rng.next_double();
      INFO("n = " << n << " eps = " << eps);
      REQUIRE_THAT(min_entropy_oracle(1.0 - eps, n),
                   Catch::Matchers::WithinAbs(phi_star(eps), 1e-6));
    }
  }
}

TEST_CASE("numeric oracle rejects infeasible requests", "[oracle]") {
  REQUIRE_THROWS_AS(min_entropy_oracle(1.2, 3), std::domain_error);
  REQUIRE_THROWS_AS(min_entropy_oracle(0.0, 3), std::domain_error);
  REQUIRE_THROWS_AS(min_entropy_oracle(0.2, 3), std::domain_error);
  REQUIRE_THROWS_AS(min_entropy_oracle(0.5, 0), std::invalid_argument);
}

TEST_CASE("random channels are normalized and reproducible", "[oracle]") {
  const RandomChannel a = random_channel(4, 11, 99);
  const RandomChannel b = random_channel(4, 11, 99);
  const RandomChannel c = random_channel(4, 11, 100);
  REQUIRE(a.joint == b.joint);
  REQUIRE(a.joint != c.joint);
  REQUIRE(a.nx == 4);
  REQUIRE(a.ny == 11);
  double total = 0.0;
  for (const auto& row : a.joint) {
    REQUIRE(row.size() == 11);
    for (double v : row) {
      REQUIRE(v >= 0.0);
      total += v;
    }
  }
  REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(random_channel(0, 5, 1), std::invalid_argument);
}

TEST_CASE("conditional entropy of a symmetric binary channel", "[oracle]") {
  const Matrix joint = {{0.45, 0.05}, {0.05, 0.45}};
  const double expect = -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1);
  REQUIRE_THAT(channel_conditional_entropy(joint), Catch::Matchers::WithinAbs(expect, 1e-12));
  // deterministic channel: no residual uncertainty
  REQUIRE(channel_conditional_entropy({{0.5, 0.0}, {0.0, 0.5}}) == 0.0);
}

TEST_CASE("MAP aggregation resolves posterior ties to the smallest signal", "[oracle]") {
  RandomChannel ch;
  ch.nx = 2;
  ch.ny = 2;
  ch.joint = {{0.25, 0.25}, {0.25, 0.25}};
  const ConfusionMatrix cm = channel_confusion(ch);
  REQUIRE_THAT(cm.joint[0][0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(cm.joint[1][0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE(cm.joint[0][1] == 0.0);
  REQUIRE(cm.joint[1][1] == 0.0);
  REQUIRE_NOTHROW(validate_confusion(cm.joint));
}

TEST_CASE("MAP aggregation always yields a valid confusion matrix", "[oracle]") {
  SplitMix64 mix(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int nx = static_cast<int>(mix.next_in(1, 6));
    const int ny = static_cast<int>(mix.next_in(1, 30));
    const ConfusionMatrix cm = channel_confusion(random_channel(nx, ny, mix.next()));
    INFO("trial " << trial);
    REQUIRE_NOTHROW(validate_confusion(cm.joint));
    // aggregation can only lower the conditional entropy reachable by the bound
    REQUIRE(equivocation_bound(cm) <= entropies(cm).h_x_given_xhat + 1e-9);
  }
}

TEST_CASE("decode-map aggregation matches MAP aggregation when maps agree", "[oracle]") {
  const RandomChannel ch = random_channel(3, 9, 31337);
  std::vector<int> decode(9);
  for (int y = 0; y < 9; ++y) {
    int best = 0;
    for (int x = 1; x < 3; ++x) {
      if (ch.joint[x][y] > ch.joint[best][y]) best = x;
    }
    decode[y] = best;
  }
  const ConfusionMatrix a = channel_confusion(ch);
  const ConfusionMatrix b = confusion_with_decoder(ch.joint, decode, 3);
  REQUIRE(a.joint == b.joint);
  REQUIRE_THROWS_AS(confusion_with_decoder(ch.joint, std::vector<int>(4, 0), 3),
                    std::invalid_argument);
}

TEST_CASE("stress test finds no violations and is replayable", "[oracle]") {
  const StressReport r1 = bound_stress_test(400, 4, 16, 7);
  const StressReport r2 = bound_stress_test(400, 4, 16, 7);
  REQUIRE(r1.trials == 400);
  REQUIRE(r1.violations.empty());
  REQUIRE(r1.min_slack >= -1e-9);
  REQUIRE(r1.min_slack == r2.min_slack);
  REQUIRE(r1.master_seed == 7);
  REQUIRE_THROWS_AS(bound_stress_test(0, 4, 16, 7), std::invalid_argument);
}

TEST_CASE("worked family members are exactly as specified", "[oracle]") {
  const ConfusionMatrix m2 = example_family(2);
  REQUIRE(m2.joint == Matrix{{0.25, 0.25}, {0.0, 0.5}});

  const ConfusionMatrix m5 = example_family(5);
  REQUIRE_NOTHROW(validate_confusion(m5.joint));
  const DecodeProfile prof = decode_profile(m5);
  for (int xh = 0; xh < 4; ++xh) REQUIRE(prof.eps[xh] == 0.0);
  // last decode outcome carries error rate (n - 1)/(n + 1)
  REQUIRE_THAT(prof.eps[4], Catch::Matchers::WithinAbs(4.0 / 6.0, 1e-12));

  for (int n = 2; n <= 12; ++n) {
    const ConfusionMatrix m = example_family(n);
    const DecodeProfile p = decode_profile(m);
    INFO("n = " << n);
    REQUIRE_THAT(p.eps[n - 1],
                 Catch::Matchers::WithinAbs(static_cast<double>(n - 1) / (n + 1), 1e-12));
  }
  REQUIRE_THROWS_AS(example_family(1), std::invalid_argument);
}

TEST_CASE("family table is ordered and coincides at n = 2", "[oracle]") {
  std::vector<int> ns;
  for (int n = 2; n <= 30; ++n) ns.push_back(n);
  const auto rows = family_bound_table(ns);
  REQUIRE(rows.size() == 29);

  REQUIRE_THAT(rows[0].bound_ours, Catch::Matchers::WithinAbs(rows[0].bound_kov, 1e-12));
  REQUIRE_THAT(rows[0].bound_ours, Catch::Matchers::WithinAbs(0.5, 1e-12));

  for (const auto& row : rows) {
    INFO("n = " << row.n);
    REQUIRE(row.bound_kov <= row.bound_ours + 1e-12);
    REQUIRE(row.bound_ours <= row.h_post + 1e-12);
    // at n = 2 and 3 every error rate sits in the linear stretch of the
    // envelope, so the bounds agree; from n = 4 they separate strictly
    if (row.n >= 4) REQUIRE(row.bound_ours > row.bound_kov + 1e-3);
  }

  const auto& r5 = rows[3];
  REQUIRE(r5.n == 5);
  REQUIRE_THAT(r5.h_post, Catch::Matchers::WithinAbs(0.4 + 0.6 * kLog2_3, 1e-9));
  REQUIRE_THAT(r5.bound_ours, Catch::Matchers::WithinAbs(0.6 * kLog2_3, 1e-9));
  REQUIRE_THAT(r5.bound_kov, Catch::Matchers::WithinAbs(0.8, 1e-9));
}

TEST_CASE("the per-decode bound is tight on every family member", "[oracle]") {
  for (int n = 2; n <= 10; ++n) {
    const ConfusionMatrix cm = example_family(n);
    const AchievingChannel ch = build_achieving_channel(cm);
    const DecodedChannel dc = achieving_joint(ch);
    INFO("n = " << n);
    // independent recomputation through the dense joint
    REQUIRE_THAT(channel_conditional_entropy(dc.joint),
                 Catch::Matchers::WithinAbs(equivocation_bound(cm), 1e-9));
    const ConfusionMatrix back = confusion_with_decoder(dc.joint, dc.decode, n);
    for (int x = 0; x < n; ++x) {
      for (int xh = 0; xh < n; ++xh) {
        REQUIRE_THAT(back.joint[x][xh], Catch::Matchers::WithinAbs(cm.joint[x][xh], 1e-9));
      }
    }
  }
}

TEST_CASE("sampling a joint is deterministic and exhaustive", "[oracle]") {
  const Matrix joint = {{0.2, 0.3}, {0.1, 0.4}};
  const auto recs1 = sample_records(joint, 5000, 12345);
  const auto recs2 = sample_records(joint, 5000, 12345);
  REQUIRE(recs1 == recs2);
  REQUIRE(recs1.size() == 5000);

  std::vector<std::vector<int>> counts(2, std::vector<int>(2, 0));
  for (const auto& [x, y] : recs1) {
    REQUIRE(x.size() == 2);
    REQUIRE(x[0] == 's');
    REQUIRE(y[0] == 'y');
    ++counts[x[1] - '0'][y[1] - '0'];
  }
  // loose frequency agreement, three-ish sigma
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double freq = counts[x][y] / 5000.0;
      REQUIRE_THAT(freq, Catch::Matchers::WithinAbs(joint[x][y], 0.03));
    }
  }
  REQUIRE_THROWS_AS(sample_records(Matrix{}, 10, 1), std::invalid_argument);
}
