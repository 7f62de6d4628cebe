#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hiblock/model.hpp"

using namespace hiblock;

TEST_CASE("structure construction and derived sizes") {
  const auto tiny = make_structure({2}, 1, {1});
  CHECK(tiny.n == 1);
  CHECK(tiny.total_dim() == 2);
  CHECK(tiny.block_sparsity() == 1);

  const auto fig3 = make_structure({25, 4}, 4, {2, 2});
  CHECK(fig3.total_dim() == 400);
  CHECK(fig3.block_sparsity() == 4);
  CHECK(fig3.mode_block_len(1) == 16);  // d_out

  CHECK_THROWS_AS(make_structure({2}, 1, {3}), DomainError);
  CHECK_THROWS_AS(make_structure({2, 3}, 1, {1}), DomainError);
  CHECK_THROWS_AS(make_structure({2}, 0, {1}), DomainError);
}

TEST_CASE("block index ranges") {
  const auto s22 = make_structure({2, 2}, 1, {1, 1});
  CHECK(block_indices(s22, 1, {1}) == std::pair<long, long>{2, 4});

  const auto fig3 = make_structure({25, 4}, 4, {2, 2});
  CHECK(block_indices(fig3, 1, {0}) == std::pair<long, long>{0, 16});
  CHECK(block_indices(fig3, 2, {0, 3}) == std::pair<long, long>{12, 16});
  CHECK_THROWS_AS(block_indices(fig3, 1, {25}), DomainError);
  CHECK_THROWS_AS(block_indices(fig3, 2, {0}), DomainError);
}

TEST_CASE("sibling block ranges tile the parent") {
  const auto s = make_structure({3, 4, 2}, 3, {1, 2, 1});
  for (int i = 0; i < 3; ++i) {
    const auto parent = block_indices(s, 1, {i});
    long cursor = parent.first;
    for (int j = 0; j < 4; ++j) {
      const auto child = block_indices(s, 2, {i, j});
      CHECK(child.first == cursor);
      cursor = child.second;
    }
    CHECK(cursor == parent.second);
  }
}

TEST_CASE("signal sampling honors the hierarchy") {
  SECTION("full support when k equals N") {
    const auto s = make_structure({2}, 1, {2});
    const auto x = sample_signal(s, SignalDist::gaussian, 1);
    CHECK(x.flat_support == std::vector<long>{0, 1});
  }
  SECTION("two-pam draws are +-1") {
    const auto s = make_structure({6, 3}, 2, {2, 1});
    const auto x = sample_signal(s, SignalDist::two_pam, 5);
    for (long u : x.flat_support)
      for (int j = 0; j < 2; ++j)
        CHECK(std::abs(std::abs(x.coeffs[u * 2 + j]) - 1.0) < 1e-15);
  }
  SECTION("determinism") {
    const auto s = make_structure({8, 4}, 2, {3, 2});
    const auto a = sample_signal(s, SignalDist::gaussian, 99);
    const auto b = sample_signal(s, SignalDist::gaussian, 99);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.flat_support == b.flat_support);
    const auto c = sample_signal(s, SignalDist::gaussian, 100);
    CHECK(a.coeffs != c.coeffs);
  }
  SECTION("support completeness: zeroing the support kills the vector") {
    const auto s = make_structure({5, 3}, 2, {2, 2});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto x = sample_signal(s, SignalDist::gaussian, seed);
      CHECK(static_cast<long>(x.flat_support.size()) == s.block_sparsity());
      for (long u : x.flat_support) x.coeffs.segment(u * 2, 2).setZero();
      CHECK(x.coeffs.norm() == 0.0);
    }
  }
  SECTION("every support unit sits inside an ancestor block") {
    const auto s = make_structure({4, 3, 2}, 2, {2, 1, 2});
    const auto x = sample_signal(s, SignalDist::gaussian, 3);
    for (int t = 1; t < s.n; ++t) {
      const long ratio = s.dims[t];
      for (long child : x.support_tree[t]) {
        const long parent = child / ratio;
        CHECK(std::binary_search(x.support_tree[t - 1].begin(),
                                 x.support_tree[t - 1].end(), parent));
      }
    }
  }
}

TEST_CASE("measurement matrix sampling") {
  const auto s = make_structure({16, 4}, 2, {2, 2});
  const auto D = sample_matrix(24, s, 7);
  CHECK(D.entries.rows() == 24);
  CHECK(D.entries.cols() == 128);
  for (long j = 0; j < D.entries.cols(); ++j)
    CHECK(std::abs(D.entries.col(j).norm() - 1.0) < 1e-12);
  const auto again = sample_matrix(24, s, 7);
  CHECK(D.entries == again.entries);
  CHECK_THROWS_AS(sample_matrix(0, s, 7), DomainError);
}

TEST_CASE("psi sampling, counts and round trip") {
  const auto s = make_structure({25, 4}, 4, {5, 2});
  const auto x = sample_signal(s, SignalDist::gaussian, 21);

  SECTION("all-zero counts give the empty PSI") {
    std::vector<PsiOverlaps> ov(2);
    const auto psi = sample_psi(s, x, ov, WeightStrategy::zero(), 3);
    CHECK(psi.theta_empty());
    CHECK(psi.empty());
  }
  SECTION("whole-block overlap marks ceil(0.2 k_out) blocks") {
    std::vector<PsiOverlaps> ov(2);
    ov[0].alpha_bar = static_cast<long>(std::ceil(0.2 * 5));
    const auto psi = sample_psi(s, x, ov, WeightStrategy::zero(), 3);
    CHECK(ov[0].alpha_bar == 1);
    CHECK(static_cast<long>(psi.modes[0].theta_star.size()) ==
          1 * s.mode_block_units(1));
  }
  SECTION("theta-star-delta fills the zero slots of active blocks") {
    std::vector<PsiOverlaps> ov(2);
    ov[0].alpha_star_delta = (16 / 4 - 2) * 5;  // (d_out/d - k_in) per block
    const auto psi = sample_psi(s, x, ov, WeightStrategy::scaled(1.0), 3);
    CHECK(static_cast<long>(psi.modes[0].theta_star_delta.size()) == 10);
    // Exhausting the pool puts exactly d_out/d - k_in in each active block.
    for (long b : x.support_tree[0]) {
      long in_block = 0;
      for (long u : psi.modes[0].theta_star_delta)
        if (u / 4 == b) ++in_block;
      CHECK(in_block == 2);
    }
  }
  SECTION("round trip recovers the requested counts") {
    Rng seeds(77);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<PsiOverlaps> ov(2);
      ov[0].alpha_bar = static_cast<long>(seeds.below(3));
      ov[0].alpha_star = static_cast<long>(seeds.below(3));
      ov[0].alpha_delta = static_cast<long>(seeds.below(3));
      ov[0].alpha_star_delta = static_cast<long>(seeds.below(3));
      ov[0].beta = static_cast<long>(seeds.below(4));
      ov[1].alpha_star = static_cast<long>(seeds.below(3));
      ov[1].beta = static_cast<long>(seeds.below(3));
      ov[1].gamma = static_cast<long>(seeds.below(3));
      const auto sig = sample_signal(s, SignalDist::gaussian, seeds.next_u64());
      const auto psi =
          sample_psi(s, sig, ov, WeightStrategy::zero(), seeds.next_u64());
      for (int t = 1; t <= 2; ++t) {
        const auto got = classify_psi(s, sig, psi, t);
        CHECK(got.alpha_bar == ov[t - 1].alpha_bar);
        CHECK(got.alpha_star == ov[t - 1].alpha_star);
        CHECK(got.alpha_delta == ov[t - 1].alpha_delta);
        CHECK(got.alpha_star_delta == ov[t - 1].alpha_star_delta);
        CHECK(got.beta == ov[t - 1].beta);
        CHECK(got.gamma == ov[t - 1].gamma);
      }
    }
  }
  SECTION("partitions are disjoint and theta excludes theta-star-delta") {
    std::vector<PsiOverlaps> ov(2);
    ov[0] = {2, 1, 2, 3, 2, 0};
    const auto psi = sample_psi(s, x, ov, WeightStrategy::zero(), 11);
    const auto& m = psi.modes[0];
    std::set<long> seen;
    for (const auto* part :
         {&m.theta_star, &m.theta_delta, &m.theta_minus, &m.theta_circ})
      for (long u : *part) CHECK(seen.insert(u).second);
    for (long u : m.theta_star_delta) CHECK(!seen.count(u));
  }
  SECTION("infeasible requests fail loudly") {
    std::vector<PsiOverlaps> ov(2);
    ov[0].alpha_bar = 6;  // only 5 active blocks
    CHECK_THROWS_AS(sample_psi(s, x, ov, WeightStrategy::zero(), 1),
                    PsiInfeasible);
    std::vector<PsiOverlaps> ov2(2);
    ov2[0].gamma = 1;  // nothing outside the root at mode 1
    CHECK_THROWS_AS(sample_psi(s, x, ov2, WeightStrategy::zero(), 1),
                    PsiInfeasible);
    std::vector<PsiOverlaps> ov3(2);
    ov3[1].alpha_star_delta = 1;  // no additional support at the last mode
    CHECK_THROWS_AS(sample_psi(s, x, ov3, WeightStrategy::zero(), 1),
                    PsiInfeasible);
  }
  SECTION("determinism") {
    std::vector<PsiOverlaps> ov(2);
    ov[0] = {1, 1, 1, 1, 1, 0};
    const auto a = sample_psi(s, x, ov, WeightStrategy::zero(), 123);
    const auto b = sample_psi(s, x, ov, WeightStrategy::zero(), 123);
    CHECK(a.modes[0].theta_star == b.modes[0].theta_star);
    CHECK(a.modes[0].theta_minus == b.modes[0].theta_minus);
    CHECK(a.modes[0].theta_star_delta == b.modes[0].theta_star_delta);
  }
}
