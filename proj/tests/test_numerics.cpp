#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "sartts/errors.hpp"
#include "sartts/numerics.hpp"

using namespace sartts;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("matmul basics") {
    const Matrix id(2, 2, {1, 0, 0, 1});
    const Matrix a(2, 2, {1, 2, 3, 4});
    CHECK(matmul(id, a) == a);

    const Matrix b(2, 1, {5, 6});
    const Matrix ab = matmul(a, b);
    CHECK(ab.at(0, 0) == 17.0);
    CHECK(ab.at(1, 0) == 39.0);
    CHECK(ab == testutil::matmul_oracle(a, b));

    const Matrix zero(2, 2, 0.0);
    CHECK(matmul(zero, a) == Matrix(2, 2, 0.0));

    CHECK_THROWS_AS(matmul(a, Matrix(3, 2, 0.0)), DimensionError);
}

TEST_CASE("matmul matches oracle and is associative on random matrices") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5), p = 1 + rng.below(5),
                          q = 1 + rng.below(5);
        const Matrix a = random_matrix(rng, n, m);
        const Matrix b = random_matrix(rng, m, p);
        const Matrix c = random_matrix(rng, p, q);

        const Matrix ab = matmul(a, b);
        for (std::size_t i = 0; i < ab.data.size(); ++i)
            CHECK(ab.data[i] == doctest::Approx(testutil::matmul_oracle(a, b).data[i]).epsilon(1e-12));

        const Matrix lhs = matmul(matmul(a, b), c);
        const Matrix rhs = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < lhs.data.size(); ++i) {
            const double denom = std::max(std::abs(rhs.data[i]), 1.0);
            CHECK(std::abs(lhs.data[i] - rhs.data[i]) / denom < 1e-9);
        }
    }
}

TEST_CASE("softmax_rows") {
    const Matrix same(1, 3, {7.5, 7.5, 7.5});
    const Matrix s1 = softmax_rows(same);
    for (double v : s1.data) CHECK(v == doctest::Approx(1.0 / 3.0));

    const Matrix forced(1, 2, {0.0, std::log(3.0)});
    const Matrix s2 = softmax_rows(forced);
    CHECK(s2.at(0, 0) == doctest::Approx(0.25));
    CHECK(s2.at(0, 1) == doctest::Approx(0.75));

    Rng rng(7);
    SUBCASE("shift invariance") {
        Matrix row = random_matrix(rng, 1, 5);
        Matrix shifted = row;
        for (double& v : shifted.data) v += 123.456;
        const Matrix a = softmax_rows(row), b = softmax_rows(shifted);
        for (std::size_t i = 0; i < a.data.size(); ++i)
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
    }

    SUBCASE("rows sum to 1 under large magnitudes") {
        for (int trial = 0; trial < 1000; ++trial) {
            const Matrix m = random_matrix(rng, 1, 1 + rng.below(8), -1e4, 1e4);
            const Matrix s = softmax_rows(m);
            double sum = 0.0;
            for (double v : s.data) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("mean_pool_rows") {
    CHECK(mean_pool_rows(Matrix(1, 3, {1, 2, 3})) == Vector({1, 2, 3}));
    CHECK(mean_pool_rows(Matrix(2, 3, {4, 5, 6, 4, 5, 6})) == Vector({4, 5, 6}));
    const Vector v = mean_pool_rows(Matrix(2, 2, {1, 3, 3, 5}));
    CHECK(v.data[0] == doctest::Approx(2.0));
    CHECK(v.data[1] == doctest::Approx(4.0));
    CHECK_THROWS_AS(mean_pool_rows(Matrix(0, 3, 0.0)), EmptyInputError);

    // pooled entries stay within per-column bounds
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix m = random_matrix(rng, 1 + rng.below(6), 1 + rng.below(6));
        const Vector pooled = mean_pool_rows(m);
        for (std::size_t j = 0; j < m.cols; ++j) {
            double lo = m.at(0, j), hi = m.at(0, j);
            for (std::size_t i = 1; i < m.rows; ++i) {
                lo = std::min(lo, m.at(i, j));
                hi = std::max(hi, m.at(i, j));
            }
            CHECK(pooled.data[j] >= lo - 1e-12);
            CHECK(pooled.data[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("cosine_similarity") {
    const Vector v({3, -1, 2});
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0));
    CHECK(cosine_similarity(Vector({1, 0}), Vector({0, 1})) == doctest::Approx(0.0));
    CHECK(cosine_similarity(Vector({1, 2, 2}), Vector({2, 1, 2})) ==
          doctest::Approx(8.0 / 9.0).epsilon(1e-12));

    CHECK_THROWS_AS(cosine_similarity(Vector({0, 0}), Vector({1, 0})), ZeroNormError);
    CHECK_THROWS_AS(cosine_similarity(Vector({1, 0}), Vector({1, 0, 0})), DimensionError);

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Vector a(1 + rng.below(8)), b(a.dim);
        for (double& x : a.data) x = rng.uniform(-1, 1);
        for (double& x : b.data) x = rng.uniform(-1, 1);
        if (norm(a) == 0.0 || norm(b) == 0.0) continue;
        const double lambda = rng.uniform(0.01, 100.0);
        Vector scaled = b;
        for (double& x : scaled.data) x *= lambda;
        CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(a, scaled)) < 1e-9);
        const double c = cosine_similarity(a, b);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("matrix invariants") {
    CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), ValidationError);
    CHECK_THROWS_AS(Vector({std::numeric_limits<double>::infinity()}), ValidationError);
}
