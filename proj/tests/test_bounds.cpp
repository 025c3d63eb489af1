#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "maxdet/bounds.hpp"
#include "maxdet/gram_search.hpp"
#include "oracles.hpp"

using namespace maxdet;

TEST_CASE("hadamard_bound") {
    CHECK(hadamard_bound(1).squared == 1);
    CHECK(hadamard_bound(2).squared == 4);
    CHECK(hadamard_bound(4).squared == 256);
    CHECK(hadamard_bound(4).floor_root() == 16);
}

TEST_CASE("ehlich_barba_bound") {
    CHECK(ehlich_barba_bound(1).squared == 1);
    CHECK(ehlich_barba_bound(5).squared == 2304);
    CHECK(ehlich_barba_bound(5).floor_root() == 48);
    CHECK(oracle::maxdet_by_rows(5).d == 48);
    CHECK_THROWS(ehlich_barba_bound(6));
    // (2^39 3^36) / bound(37)
    BigInt d37 = pow_big(2, 39) * pow_big(3, 36);
    double ratio = bound_ratio(d37, ehlich_barba_bound(37));
    CHECK(std::round(ratio * 1000) == 936);
    CHECK(ratio == doctest::Approx(8 / std::sqrt(73.0)).epsilon(1e-12));
}

TEST_CASE("ehlich_params") {
    for (int n = 3; n < 100; n += 4) {
        EhlichParams p = ehlich_params(n);
        int s = n == 3 ? 3 : n == 7 ? 5 : n <= 59 ? 6 : 7;
        CHECK(p.s == s);
        CHECK(p.r == n / s);
        CHECK(p.u + p.v == s);
        CHECK(p.u * p.r + p.v * (p.r + 1) == n);
    }
    CHECK_THROWS(ehlich_params(5));
}

TEST_CASE("ehlich_bound") {
    CHECK(ehlich_bound(3).squared == 16);
    CHECK(ehlich_bound(3).floor_root() == 4);
    CHECK(ehlich_bound(7).squared == 344064);
    CHECK(BigInt(331776) <= ehlich_bound(7).squared);
    CHECK_THROWS(ehlich_bound(9));
    BigInt d19 = pow_big(2, 30) * 49 * 17;
    double ratio = bound_ratio(d19, ehlich_bound(19));
    CHECK(std::round(ratio * 1000) == 975);
    CHECK(ratio == doctest::Approx(17 / std::sqrt(304.0)).epsilon(1e-12));
    for (int n = 7; n <= 59; n += 4) CHECK(ehlich_bound(n).squared <= ehlich_barba_bound(n).squared);
}

TEST_CASE("d_star") {
    const std::vector<long> phi{-5, -1, 3};
    DStar a = d_star(IntMatrix{{7}}, 7, 1, phi);
    CHECK(a.d == 6);
    CHECK(a.gamma == std::vector<long>{-1});
    DStar b = d_star(IntMatrix{{7, 3}, {3, 7}}, 7, 1, phi);
    CHECK(b.d == 32);
    CHECK(b.gamma == std::vector<long>{-1, -1});
    IntMatrix m{{7, 3}, {3, 7}};
    std::vector<std::vector<long>> zero{{0, 0}};
    CHECK(d_star(m, 1, zero).d == 40);
    CHECK_THROWS(d_star(m, 1, std::vector<std::vector<long>>{}));

    // brute force over the border vectors
    BigInt best = -1;
    for (long x : phi)
        for (long y : phi) {
            oracle::Mat bordered{{7, 3, x}, {3, 7, y}, {x, y, 1}};
            oracle::Mat psd{{7, 3, x}, {3, 7, y}, {x, y, 7}};
            if (oracle::det_cofactor(psd) < 0) continue;
            BigInt d = oracle::det_cofactor(bordered);
            if (d > best) best = d;
        }
    CHECK(best == 32);
}

TEST_CASE("km_bound and sharper_bound") {
    IntMatrix m{{7, 3}, {3, 7}};
    CHECK(km_bound(m, 7, 1, 32) == 518400);
    CHECK(km_bound(m, 7, 1, -5) == BigInt(7776) * 40);
    CHECK(km_bound(m, 7, 1, 0) == BigInt(7776) * 40);
    CHECK(sharper_bound(m, 7, 32) == 486144);
    CHECK(sharper_bound(m, 7, -1) == BigInt(7776) * 40);
    CHECK(sharper_bound(m, 7, 32) <= km_bound(m, 7, 1, 32));
    CHECK_THROWS(sharper_bound(m, 9, 32));

    IntMatrix m6 = IntMatrix::identity(6);
    for (int i = 0; i < 6; ++i) m6(i, i) = 7;
    BigInt d6 = det_exact(m6);
    CHECK(sharper_bound(m6, 7, 11) == 6 * d6 + 11);
}

TEST_CASE("partition_bound") {
    std::vector<int> parts;
    CHECK(partition_bound(IntMatrix{{7}}, 7, &parts) == 344064);
    std::sort(parts.begin(), parts.end());
    CHECK(parts == std::vector<int>{1, 1, 2, 2});
    CHECK(partition_bound(IntMatrix{{7}}, 7) == ehlich_bound(7).squared);

    std::vector<int> p222{2, 2, 2};
    IntMatrix b = partition_block_matrix(IntMatrix{{7}}, 7, p222);
    CHECK(b.order() == 7);
    CHECK(oracle::det_cofactor(oracle::to_mat(b)) == 331776);

    // brute force over all 11 partitions of 6
    CHECK(integer_partitions(6).size() == 11);
    BigInt best = 0;
    for (const auto& p : integer_partitions(6)) {
        BigInt d = oracle::det_cofactor(oracle::to_mat(partition_block_matrix(IntMatrix{{7}}, 7, p)));
        if (d > best) best = d;
    }
    CHECK(best == 344064);

    // r = n - 1: the single completion bordered by -1
    IntMatrix m6(6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m6(i, j) = i == j ? 7 : -1;
    oracle::Mat full(7, std::vector<long>(7, -1));
    for (int i = 0; i < 7; ++i) full[i][i] = 7;
    CHECK(partition_bound(m6, 7) == oracle::det_cofactor(full));

    // rejected preconditions
    CHECK_THROWS(partition_bound(IntMatrix{{7, 3}, {3, 7}}, 7));
    CHECK_THROWS(partition_bound(IntMatrix{{9}}, 9));
}

TEST_CASE("is_block_matrix") {
    CHECK(is_block_matrix(fixtures::order7_blocks(), 7));
    IntMatrix all(5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) all(i, j) = i == j ? 5 : -1;
    CHECK(is_block_matrix(all, 5));
    IntMatrix bad = all;
    bad(0, 1) = bad(1, 0) = 3;
    bad(0, 2) = bad(2, 0) = 3;  // column 0 and 1 now differ at row 2
    CHECK_FALSE(is_block_matrix(bad, 5));
    IntMatrix odd = all;
    odd(0, 1) = odd(1, 0) = 3;
    CHECK(is_block_matrix(odd, 5));
    odd(2, 3) = odd(3, 2) = 1;
    CHECK_FALSE(is_block_matrix(odd, 5));
}

TEST_CASE("completion bounds dominate every brute-force completion at n=7") {
    const int n = 7;
    const std::vector<long> phi = oracle::gram_values(n);
    REQUIRE(phi == admissible_values(n).phi);
    std::size_t minors = 0, partition_checked = 0;
    oracle::CompletionWalk walk;
    walk.max_order = 4;
    walk.at_node = [&](const oracle::Mat& lead, std::int64_t best) {
        const int r = static_cast<int>(lead.size());
        IntMatrix mr = oracle::to_int(lead);
        REQUIRE(is_candidate_minor(mr, n));
        ++minors;
        BigInt ds = d_star(mr, n, 1, phi).d;
        INFO("r=" << r << " minor=" << mr.str());
        REQUIRE(km_bound(mr, n, 1, ds) >= best);
        REQUIRE(sharper_bound(mr, n, ds) >= best);
        REQUIRE(sharper_bound(mr, n, ds) <= km_bound(mr, n, 1, ds));
        if (!partition_bound_applies(mr, n)) return;
        // completions whose later rows start with r entries -1
        oracle::CompletionWalk minus;
        minus.filter = [r](int, int col, long v) { return col >= r || v == -1; };
        std::int64_t best_minus = oracle::walk_completions(lead, n, minus);
        REQUIRE(partition_bound(mr, n) >= best_minus);
        REQUIRE(partition_bound(mr, n) <= sharper_bound(mr, n, ds));
        ++partition_checked;
    };
    std::int64_t overall = oracle::walk_completions({}, n, walk);
    // the block matrix (1,2,2,1,1): a candidate minor, but not a square determinant
    CHECK(overall == 344064);
    CHECK(minors == 1 + 3 + 27 + 250);
    CHECK(partition_checked > 0);
}
