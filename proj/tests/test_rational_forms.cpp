#include <doctest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/equivalence.hpp"
#include "maxdet/gram_search.hpp"
#include "maxdet/rational_forms.hpp"
#include "oracles.hpp"

using namespace maxdet;

namespace {

RatMatrix product(const RatMatrix& a, const RatMatrix& b) {
    const std::size_t n = a.size();
    RatMatrix out(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

RatMatrix transposed(const RatMatrix& a) {
    RatMatrix out(a.size(), std::vector<Rational>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a[j][i];
    return out;
}

void check_diagonal(const RatMatrix& a, const DiagonalForm& f) {
    RatMatrix d = product(product(f.u, a), transposed(f.u));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(d[i][j] == (i == j ? f.d[i] : Rational(0)));
    for (const auto& x : f.d) REQUIRE(x != 0);
}

DiagonalForm diag_form(std::vector<Rational> d) {
    DiagonalForm f;
    f.u.assign(d.size(), std::vector<Rational>(d.size(), 0));
    for (std::size_t i = 0; i < d.size(); ++i) f.u[i][i] = 1;
    f.d = std::move(d);
    return f;
}

IntMatrix diag_int(std::vector<long> d) {
    IntMatrix m(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

// Symmetric and nonsingular, entries in [-4, 4].
IntMatrix random_form(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> entry(-4, 4);
    for (;;) {
        IntMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = entry(rng);
        if (det_exact(m) != 0) return m;
    }
}

// A rational change of basis: an integer matrix with nonzero determinant.
IntMatrix random_basis(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> entry(-3, 3);
    for (;;) {
        IntMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = entry(rng);
        if (det_exact(m) != 0) return m;
    }
}

// Does not decompose, and G is not rationally equivalent to I.
IntMatrix order9_ruled_out() {
    IntMatrix g(9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) g(i, j) = i == j ? 9 : 1;
    for (int j = 1; j < 9; ++j) g(0, j) = g(j, 0) = -3;
    g(1, 2) = g(2, 1) = -3;
    g(3, 4) = g(4, 3) = -3;
    return g;
}

// Does not decompose, yet passes every rational test.
IntMatrix order7_inconclusive() {
    return IntMatrix{{7, 3, 3, -1, -1, -1, -1},  {3, 7, -1, 3, -1, -1, -1},  {3, -1, 7, -1, -1, -1, -1},
                     {-1, 3, -1, 7, -1, -1, -1}, {-1, -1, -1, -1, 7, 3, 3},  {-1, -1, -1, -1, 3, 7, -1},
                     {-1, -1, -1, -1, 3, -1, 7}};
}

}  // namespace

TEST_CASE("factorize and squarefree_part") {
    auto f = factorize(BigInt(-360));
    CHECK(f.sign == -1);
    CHECK(f.factors == std::vector<std::pair<BigInt, int>>{{2, 3}, {3, 2}, {5, 1}});
    BigInt big = BigInt("1000000007") * BigInt("998244353") * 12;
    auto g = factorize(big);
    BigInt back = 1;
    for (const auto& [p, e] : g.factors) back *= pow_big(p, e);
    CHECK(back == big);
    CHECK(g.factors.back().first == BigInt("1000000007"));
    CHECK_THROWS(factorize(BigInt(0)));
    CHECK(squarefree_part(Rational(12, 5)) == 15);
    CHECK(squarefree_part(Rational(-8)) == -2);
    for (long v = -200; v <= 200; ++v)
        if (v != 0) REQUIRE(squarefree_part(Rational(v)) == oracle::squarefree(v));
}

TEST_CASE("diagonalize") {
    DiagonalForm id = diagonalize(IntMatrix::identity(4));
    CHECK(id.d == std::vector<Rational>(4, Rational(1)));

    // zero pivot handled by combining rows
    IntMatrix swap{{0, 1}, {1, 0}};
    DiagonalForm s = diagonalize(swap);
    check_diagonal(to_rational(swap), s);
    Rational prod = s.d[0] * s.d[1];
    CHECK(prod < 0);
    CHECK(squarefree_part(-prod) == 1);

    IntMatrix g = fixtures::order7_blocks();
    check_diagonal(to_rational(g), diagonalize(g));

    std::mt19937_64 rng(41);
    for (int t = 0; t < 200; ++t) {
        IntMatrix m = random_form(2 + t % 6, rng);
        check_diagonal(to_rational(m), diagonalize(m));
    }
    CHECK_THROWS(diagonalize(IntMatrix{{1, 1}, {1, 1}}));
    CHECK_THROWS(diagonalize(IntMatrix{{1, 2}, {3, 4}}));
}

TEST_CASE("p_signature") {
    CHECK(p_signature(diag_form({1, 1}), 3).value == 0);
    CHECK(p_signature(diag_form({3, 3}), 3).value == 4);
    CHECK(p_signature(diag_form({1, -1, 1}), -1).value == 1);
    CHECK_FALSE(rationally_equivalent(diag_int({1, 1}), diag_int({3, 3})));
    CHECK(rationally_equivalent(diag_int({1, 1}), diag_int({2, 2})));

    // square scalings leave every signature unchanged, and the signatures
    // satisfy the oddity formula: the value at 2 (the oddity) equals the
    // signature plus the odd p-excesses, mod 8
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<long> entry(-30, 30);
    std::uniform_int_distribution<long> scale(1, 7);
    for (int t = 0; t < 300; ++t) {
        const int n = 1 + t % 5;
        std::vector<Rational> d(n), d2(n);
        std::set<BigInt> primes;
        for (int i = 0; i < n; ++i) {
            long a = 0, b = 0;
            while (a == 0) a = entry(rng);
            while (b == 0) b = entry(rng);
            d[i] = Rational(a, std::abs(b));
            d[i].canonicalize();
            long s = scale(rng), q = scale(rng);
            d2[i] = d[i] * Rational(s * s, q * q);
            for (const auto& p : oracle::prime_divisors(a)) primes.insert(p);
            for (const auto& p : oracle::prime_divisors(b)) primes.insert(p);
        }
        primes.erase(2);
        DiagonalForm f = diag_form(d), f2 = diag_form(d2);
        int total = p_signature(f, -1).value;
        REQUIRE(total == p_signature(f2, -1).value);
        for (const auto& p : primes) {
            int v = p_signature(f, p).value;
            REQUIRE(v == p_signature(f2, p).value);
            REQUIRE(v >= 0);
            REQUIRE(v < 8);
            total += v;
        }
        for (const BigInt p : {3, 5, 7, 11, 13})
            if (!primes.count(p)) REQUIRE(p_signature(f, p).value == 0);
        int oddity = p_signature(f, 2).value;
        REQUIRE(oddity == p_signature(f2, 2).value);
        REQUIRE(((total - oddity) % 8 + 8) % 8 == 0);
    }
    CHECK(p_signature(diag_form({5}), 2).value == 5);
    CHECK(p_signature(diag_form({10}), 2).value == 1);
}

TEST_CASE("rational equivalence agrees with Hilbert-symbol invariants") {
    std::mt19937_64 rng(43);
    int yes = 0, no = 0;
    for (int t = 0; t < 400; ++t) {
        const int n = 1 + t % 5;
        IntMatrix a = random_form(n, rng);
        IntMatrix b;
        if (t % 2) {
            IntMatrix p = random_basis(n, rng);
            b = p * a * p.transpose();
        } else {
            b = random_form(n, rng);
        }
        bool expected = oracle::rationally_equivalent(a, b, static_cast<std::uint64_t>(t));
        REQUIRE(rationally_equivalent(a, b) == expected);
        REQUIRE(rationally_equivalent(b, a) == expected);
        if (t % 2) REQUIRE(expected);
        (expected ? yes : no)++;
    }
    CHECK(yes > 200);
    CHECK(no > 50);

    // transitivity on sampled triples
    for (int t = 0; t < 100; ++t) {
        IntMatrix a = random_form(3, rng), b = random_form(3, rng), c = random_form(3, rng);
        if (rationally_equivalent(a, b) && rationally_equivalent(b, c)) REQUIRE(rationally_equivalent(a, c));
        REQUIRE(rationally_equivalent(a, a));
    }
    CHECK_THROWS(rationally_equivalent(IntMatrix{{1, 1}, {1, 1}}, IntMatrix::identity(2)));
}

TEST_CASE("powers of Gram pairs are rationally equivalent, orders up to 11") {
    // A^(2k+1) = A^k A (A^k)^T and A^(2k) = A^k (A^k)^T, so powers reduce to A
    // or I under rational congruence.  Direct powers grow past what factoring
    // handles quickly beyond order 7; there the reduced forms are compared.
    auto reduced = [](const IntMatrix& a, int e) {
        IntMatrix half = matrix_power(a, e / 2);
        IntMatrix base = e % 2 ? a : IntMatrix::identity(a.order());
        REQUIRE(half * base * half.transpose() == matrix_power(a, e));
        return base;
    };
    std::mt19937_64 rng(44);
    for (int n = 1; n <= 11; n += 2)
        for (int t = 0; t < 3; ++t) {
            SignMatrix r = oracle::random_nonsingular(n, rng);
            IntMatrix g = gram(r), h = dual_gram(r);
            for (int j = 0; j < n; ++j) {
                REQUIRE(rationally_equivalent(reduced(g, j + 1), reduced(h, j)));
                REQUIRE(rationally_equivalent(reduced(h, j + 1), reduced(g, j)));
                if (n > 7) continue;
                IntMatrix a = matrix_power(g, j + 1), b = matrix_power(h, j);
                REQUIRE(rationally_equivalent(a, b));
                if (n <= 5) REQUIRE(oracle::rationally_equivalent(a, b));
            }
            CHECK(hm_indecomposability(g, h).verdict == HmVerdict::inconclusive);
            if (n > 7) continue;
            HmOptions direct;
            direct.reduce_exponents = false;
            CHECK(hm_indecomposability(g, h, direct).verdict == HmVerdict::inconclusive);
        }
}

TEST_CASE("reduced and direct exponents agree") {
    // pairs with equal characteristic polynomials from the order-7 census
    SearchConfig cfg;
    cfg.n = 7;
    cfg.d_min = 1;
    cfg.workers = 1;
    std::vector<IntMatrix> grams;
    for (auto& c : search_grams(cfg).candidates) grams.push_back(c.m);
    auto pairs = enumerate_pairs(grams);
    REQUIRE(pairs.size() > 100);
    HmOptions direct;
    direct.reduce_exponents = false;
    for (std::size_t i = 0; i < pairs.size(); i += pairs.size() / 60) {
        const IntMatrix& g = grams[pairs[i].first];
        const IntMatrix& h = grams[pairs[i].second];
        auto a = hm_indecomposability(g, h), b = hm_indecomposability(g, h, direct);
        REQUIRE(a.verdict == b.verdict);
        REQUIRE(a.j == b.j);
        REQUIRE(a.direction == b.direction);
    }
    IntMatrix g9 = order9_ruled_out();
    CHECK(hm_indecomposability(g9, g9, direct).j == hm_indecomposability(g9, g9).j);
}

TEST_CASE("indecomposability fixtures") {
    IntMatrix g9 = order9_ruled_out();
    auto cert = hm_indecomposability(g9, g9);
    CHECK(cert.verdict == HmVerdict::ruled_out);
    CHECK(cert.j == 0);
    CHECK(cert.direction == HmDirection::g_side);
    // G is not rationally equivalent to the identity
    CHECK_FALSE(oracle::rationally_equivalent(g9, IntMatrix::identity(9)));
    CHECK(decompose_first(GramPairContext::make(g9, g9)).status == DecompositionStatus::none);

    IntMatrix g7 = order7_inconclusive();
    CHECK(hm_indecomposability(g7, g7).verdict == HmVerdict::inconclusive);
    CHECK(decompose_first(GramPairContext::make(g7, g7)).status == DecompositionStatus::none);
    // every R with R R^T = G has a dual Gram matrix outside the class of G
    auto all = decompose_v1_oracle(g7);
    CHECK_FALSE(all.empty());
    const IntMatrix canon = gram_canonical(g7).canonical;
    for (const auto& r : all) REQUIRE(gram_canonical(dual_gram(r)).canonical != canon);

    HmOptions capped;
    capped.max_j = 0;
    CHECK(hm_indecomposability(g9, g9, capped).verdict == HmVerdict::ruled_out);
    CHECK(to_string(HmVerdict::unfactored) != to_string(HmVerdict::inconclusive));
}
