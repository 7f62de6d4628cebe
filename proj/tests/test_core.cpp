#include <catch2/catch_amalgamated.hpp>

#include "hiblock/core.hpp"
#include "hiblock/inequalities.hpp"
#include "hiblock/rng.hpp"

using namespace hiblock;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<long>(v.size()));
  long i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

// Brute-force rho oracle: explicit loop over all blocks, independent of the
// grouped implementation.
double rho_c_oracle(const MatrixXd& D, int q, int d) {
  const long rb = (D.rows() + q - 1) / q;
  const long cb = (D.cols() + d - 1) / d;
  double best = 0;
  for (long j = 0; j < cb; ++j) {
    double sum = 0;
    for (long i = 0; i < rb; ++i) {
      MatrixXd blk = MatrixXd::Zero(q, d);
      for (int r = 0; r < q; ++r)
        for (int c = 0; c < d; ++c) {
          const long rr = i * q + r, cc = j * d + c;
          if (rr < D.rows() && cc < D.cols()) blk(r, c) = D(rr, cc);
        }
      sum += Eigen::JacobiSVD<MatrixXd>(blk).singularValues()(0);
    }
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

TEST_CASE("mixed norm on the stated examples") {
  CHECK(mixed_norm(vec({3, 4, 0, 0}), 2, MixedP::inf) == Catch::Approx(5.0));
  CHECK(mixed_norm(vec({1, 0, 0, 1}), 2, MixedP::one) == Catch::Approx(2.0));
  CHECK(mixed_norm(vec({1, 1, 1, 1}), 2, MixedP::two) == Catch::Approx(2.0));
  CHECK_THROWS_AS(mixed_norm(vec({1, 2, 3}), 2, MixedP::one), DomainError);
}

TEST_CASE("rho on identity and all-ones") {
  const MatrixXd I4 = MatrixXd::Identity(4, 4);
  CHECK(rho_r(I4, {2, 2}) == Catch::Approx(1.0));
  CHECK(rho_c(I4, {2, 2}) == Catch::Approx(1.0));
  const MatrixXd ones = MatrixXd::Ones(2, 2);
  CHECK(rho_r(ones, {1, 1}) == Catch::Approx(2.0));
  CHECK(rho_c(ones, {1, 1}) == Catch::Approx(2.0));
  CHECK_THROWS_AS(rho_c(MatrixXd(), {1, 1}), DomainError);
}

TEST_CASE("rho matches the per-block enumeration oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int d = 1 + static_cast<int>(rng.below(3));
    const MatrixXd D = random_matrix(6, 6, rng);
    CHECK(rho_c(D, {q, d}) == Catch::Approx(rho_c_oracle(D, q, d)));
    CHECK(rho_r(D, {q, d}) == Catch::Approx(rho_c_oracle(D.transpose(), d, q)));
  }
}

TEST_CASE("spectral norm and min singular on diagonal cases") {
  CHECK(spectral_norm(MatrixXd::Identity(5, 5)) == Catch::Approx(1.0));
  CHECK(min_singular(MatrixXd::Identity(5, 5)) == Catch::Approx(1.0));
  MatrixXd diag = MatrixXd::Zero(2, 2);
  diag(0, 0) = 3;
  diag(1, 1) = 1;
  CHECK(spectral_norm(diag) == Catch::Approx(3.0));
  CHECK(min_singular(diag) == Catch::Approx(1.0));
  MatrixXd bad = diag;
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(spectral_norm(bad), DomainError);
}

TEST_CASE("spectral norm bounded by sqrt(rho_c rho_r) for every partition") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd D = random_matrix(20, 8, rng);
    const double s = spectral_norm(D);
    for (int q : {1, 2, 4, 5}) {
      for (int d : {1, 2, 4}) {
        CHECK(s <= std::sqrt(rho_c(D, {q, d}) * rho_r(D, {q, d})) + 1e-9);
      }
    }
  }
}

TEST_CASE("complement projector examples and orthogonality") {
  MatrixXd e1 = MatrixXd::Zero(3, 1);
  e1(0, 0) = 1;
  const VectorXd v = vec({1, 2, 3});
  const VectorXd p = proj_complement(e1).apply(v);
  CHECK(p[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(p[1] == Catch::Approx(2.0));
  CHECK(p[2] == Catch::Approx(3.0));

  Rng rng(7);
  const MatrixXd full = random_matrix(4, 4, rng);
  CHECK(proj_complement(full).apply(vec({1, -2, 0.5, 3})).norm() ==
        Catch::Approx(0.0).margin(1e-9));

  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd basis = random_matrix(12, 4, rng);
    VectorXd x(12);
    for (int i = 0; i < 12; ++i) x[i] = rng.gaussian();
    const VectorXd r = proj_complement(basis).apply(x);
    CHECK((basis.transpose() * r).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, x.norm()));
  }

  MatrixXd rank1(3, 2);
  rank1 << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(proj_complement(rank1), RankError);
}

TEST_CASE("least squares matches the normal-equations oracle") {
  Rng rng(11);
  SECTION("identity") {
    const VectorXd y = vec({1, 2, 3});
    CHECK((ls_solve(MatrixXd::Identity(3, 3), y) - y).norm() ==
          Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("orthonormal columns") {
    MatrixXd Q(3, 2);
    Q << 1, 0, 0, 1, 0, 0;
    const VectorXd y = 2 * Q.col(0) + 3 * Q.col(1);
    const VectorXd c = ls_solve(Q, y);
    CHECK(c[0] == Catch::Approx(2.0));
    CHECK(c[1] == Catch::Approx(3.0));
  }
  SECTION("random overdetermined") {
    for (int trial = 0; trial < 50; ++trial) {
      const MatrixXd A = random_matrix(15, 6, rng);
      VectorXd y(15);
      for (int i = 0; i < 15; ++i) y[i] = rng.gaussian();
      const VectorXd c = ls_solve(A, y);
      const VectorXd oracle =
          (A.transpose() * A).ldlt().solve(A.transpose() * y);
      CHECK((c - oracle).norm() <= 1e-9 * std::max(1.0, oracle.norm()));
      CHECK((A.transpose() * (y - A * c)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  SECTION("rank deficiency throws") {
    MatrixXd A(3, 2);
    A << 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS(ls_solve(A, vec({1, 1, 1})), RankError);
  }
}

TEST_CASE("rho norm axioms hold on random draws") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int d = 1 + static_cast<int>(rng.below(3));
    const MatrixXd A = random_matrix(6, 6, rng);
    const MatrixXd B = random_matrix(6, 6, rng);
    const double beta = 3.0 * (rng.uniform() - 0.5);
    CHECK(rho_c(A, {q, d}) >= 0.0);
    CHECK(rho_c(beta * A, {q, d}) ==
          Catch::Approx(std::abs(beta) * rho_c(A, {q, d})).margin(1e-12));
    CHECK(rho_c(A + B, {q, d}) <= rho_c(A, {q, d}) + rho_c(B, {q, d}) + 1e-9);
    CHECK(rho_r(A + B, {q, d}) <= rho_r(A, {q, d}) + rho_r(B, {q, d}) + 1e-9);
  }
  CHECK(rho_c(MatrixXd::Zero(4, 4), {2, 2}) == 0.0);
}

TEST_CASE("rho submultiplicativity over random partition triples") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int d1 = 1 + static_cast<int>(rng.below(3));
    const int d2 = 1 + static_cast<int>(rng.below(3));
    const int d3 = 1 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(3));
    const int n = 1 + static_cast<int>(rng.below(3));
    const int g = 1 + static_cast<int>(rng.below(3));
    const MatrixXd A = random_matrix(m * d1, n * d2, rng);
    const MatrixXd B = random_matrix(n * d2, g * d3, rng);
    CHECK(rho_c(A * B, {d1, d3}) <=
          rho_c(A, {d1, d2}) * rho_c(B, {d2, d3}) + 1e-9);
  }
}

TEST_CASE("ceiling refinement with non-divisible block lengths") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int d1 = 1 + static_cast<int>(rng.below(4));
    const int d2 = 1 + static_cast<int>(rng.below(5));
    const MatrixXd A = random_matrix(3 * d1, 2 * d2, rng);
    const MatrixXd padded = pad_column_blocks(A, d2, d1);
    CHECK(rho_c(A, {d1, d2}) <=
          std::ceil(double(d2) / d1) * rho_c(padded, {d1, d1}) + 1e-9);
  }
}

TEST_CASE("two-way partition sandwich on random vector sets") {
  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto out = check_inequality(IneqKind::partition_sandwich, rng.next_u64());
    CHECK(out.holds);
  }
}

TEST_CASE("column-submatrix spectral norm never exceeds the full matrix") {
  Rng rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    const auto out = check_inequality(IneqKind::submatrix_spectral, rng.next_u64());
    CHECK(out.holds);
  }
}

namespace {

// Randomized lower-bound probe for the mixed operator norm
// max_x ||Dx||_{(q)2,p} / ||x||_{(d)2,p}; the certified upper bounds are
// rho_r (p = inf) and rho_c (p = 1), and the p = 2 case is the spectral norm.
double operator_norm_probe(const MatrixXd& D, int q, int d, MixedP p, Rng& rng,
                           int probes = 200) {
  double best = 0;
  for (int t = 0; t < probes; ++t) {
    VectorXd x(D.cols());
    for (long i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
    if (t % 3 == 1) {
      // Sparse probes stress the per-block structure of the norm.
      for (long i = 0; i < x.size(); ++i)
        if (rng.uniform() < 0.6) x[i] = 0;
    }
    const double den = mixed_norm(x, d, p);
    if (den == 0) continue;
    best = std::max(best, mixed_norm(D * x, q, p) / den);
  }
  return best;
}

}  // namespace

TEST_CASE("rho bounds dominate the randomized operator-norm probe") {
  Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int d = 1 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(3));
    const int n = 1 + static_cast<int>(rng.below(3));
    const MatrixXd D = random_matrix(m * q, static_cast<long>(n) * d, rng);
    CHECK(operator_norm_probe(D, q, d, MixedP::inf, rng) <=
          rho_r(D, {q, d}) + 1e-9);
    CHECK(operator_norm_probe(D, q, d, MixedP::one, rng) <=
          rho_c(D, {q, d}) + 1e-9);
    CHECK(operator_norm_probe(D, q, d, MixedP::two, rng) <=
          spectral_norm(D) + 1e-9);
  }
}

TEST_CASE("grouped rho equals padded uniform rho on ragged groups") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd D = random_matrix(6, 7, rng);
    // Ragged column groups 3|4 against uniform padding to width 4.
    const double ragged = rho_c_grouped(D, {2, 2, 2}, {3, 4});
    MatrixXd padded = MatrixXd::Zero(6, 8);
    padded.leftCols(3) = D.leftCols(3);
    padded.rightCols(4) = D.rightCols(4);
    CHECK(ragged == Catch::Approx(rho_c(padded, {2, 4})));
  }
}
