#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/equivalence.hpp"
#include "maxdet/gram_search.hpp"
#include "oracles.hpp"

using namespace maxdet;

namespace {

// Columns sorted, so designs differing by a column permutation coincide.
SignMatrix sort_columns(const SignMatrix& r) {
    const int n = r.order();
    std::vector<std::vector<int>> cols(n, std::vector<int>(n));
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) cols[c][i] = r(i, c);
    std::sort(cols.begin(), cols.end());
    SignMatrix out(n);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) out.set(i, c, cols[c][i]);
    return out;
}

std::vector<IntMatrix> census(int n) {
    SearchConfig cfg;
    cfg.n = n;
    cfg.d_min = 1;
    cfg.workers = 1;
    std::vector<IntMatrix> out;
    for (auto& c : search_grams(cfg).candidates) out.push_back(c.m);
    return out;
}

}  // namespace

TEST_CASE("solve_frame_system") {
    std::vector<long> rhs{-1, -1, 3};
    auto xs = solve_frame_system(fixtures::worked_state(), rhs);
    std::set<std::vector<int>> got(xs.begin(), xs.end());
    CHECK(got == std::set<std::vector<int>>{{1, 1, 1, 0}, {2, 0, 0, 1}});

    FrameState one;
    one.k = 1;
    one.n = 7;
    one.q = {{1}};
    one.w.w = {7};
    std::vector<long> g3{3}, g4{4};
    CHECK(solve_frame_system(one, g3) == std::vector<std::vector<int>>{{5}});
    CHECK(solve_frame_system(one, g4).empty());

    // brute force over the box for random systems
    std::mt19937_64 rng(17);
    for (int t = 0; t < 200; ++t) {
        FrameState s;
        s.n = 0;
        int m = 2 + static_cast<int>(rng() % 4), k = 1 + static_cast<int>(rng() % m);
        for (int i = 0; i < m; ++i) {
            s.w.w.push_back(1 + static_cast<int>(rng() % 3));
            s.n += s.w.w.back();
        }
        s.k = k;
        s.q.assign(k, std::vector<int>(m));
        for (auto& row : s.q)
            for (auto& v : row) v = (rng() & 1) ? 1 : -1;
        std::vector<int> x0(m);
        for (int i = 0; i < m; ++i) x0[i] = static_cast<int>(rng() % (s.w.w[i] + 1));
        std::vector<long> b(k, 0);
        for (int i = 0; i < k; ++i)
            for (int c = 0; c < m; ++c) b[i] += s.q[i][c] * (2 * x0[c] - s.w.w[c]);
        std::set<std::vector<int>> expect;
        std::vector<int> x(m, 0);
        std::function<void(int)> rec = [&](int c) {
            if (c == m) {
                for (int i = 0; i < k; ++i) {
                    long acc = 0;
                    for (int j = 0; j < m; ++j) acc += s.q[i][j] * (2 * x[j] - s.w.w[j]);
                    if (acc != b[i]) return;
                }
                expect.insert(x);
                return;
            }
            for (x[c] = 0; x[c] <= s.w.w[c]; ++x[c]) rec(c + 1);
        };
        rec(0);
        auto sols = solve_frame_system(s, b);
        REQUIRE(std::set<std::vector<int>>(sols.begin(), sols.end()) == expect);
        REQUIRE(sols.size() == expect.size());
    }
}

TEST_CASE("refine_framing") {
    std::vector<int> a{1, 1, 1, 0}, b{2, 0, 0, 1};
    FrameState s1 = refine_framing(fixtures::worked_state(), a);
    CHECK(s1.k == 4);
    CHECK(s1.w.w == std::vector<int>{1, 1, 1, 2, 1, 1});
    CHECK(s1.q == std::vector<std::vector<int>>{
                      {1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, -1, -1}, {1, 1, -1, -1, 1, -1}, {1, -1, 1, -1, 1, -1}});
    FrameState s2 = refine_framing(fixtures::worked_state(), b);
    CHECK(s2.w.w == std::vector<int>{2, 3, 1, 1});
    CHECK(s2.q == std::vector<std::vector<int>>{{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}});
    std::vector<int> full{2, 3, 1, 1};
    FrameState s3 = refine_framing(fixtures::worked_state(), full);
    CHECK(s3.w.w == full);
    CHECK(s3.q.back() == std::vector<int>{1, 1, 1, 1});
    // the expansion is the 4 x 7 prefix of R
    CHECK(s1.expand().size() == 4);
    CHECK(s1.expand()[3] == std::vector<int>{1, -1, 1, -1, -1, 1, -1});
}

TEST_CASE("worked example: one branch completes, the other dies") {
    IntMatrix g = fixtures::order7_blocks();
    std::vector<int> a{1, 1, 1, 0}, b{2, 0, 0, 1};
    // rows 1..3 of the example agree with G
    auto rows = fixtures::worked_state().expand();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            long dot = 0;
            for (int c = 0; c < 7; ++c) dot += rows[i][c] * rows[j][c];
            REQUIRE(dot == g(i, j));
        }
    // single-Gram constraint only
    std::vector<SignMatrix> from_a, from_b;
    fixtures::completions(refine_framing(fixtures::worked_state(), a), g, nullptr, from_a);
    fixtures::completions(refine_framing(fixtures::worked_state(), b), g, nullptr, from_b);
    CHECK(from_b.empty());
    REQUIRE_FALSE(from_a.empty());
    // some completion is a decomposition of (G, G) up to relabelling columns
    const SignMatrix* witness = nullptr;
    for (const auto& r : from_a) {
        REQUIRE(gram(r) == g);
        if (!witness && oracle::gram_equivalent(dual_gram(r), g)) witness = &r;
    }
    REQUIRE(witness);

    // with the pair checks against that labelling of H
    auto ctx = GramPairContext::make(g, dual_gram(*witness));
    std::vector<SignMatrix> pair_a, pair_b;
    fixtures::completions(refine_framing(fixtures::worked_state(), a), g, &ctx, pair_a);
    fixtures::completions(refine_framing(fixtures::worked_state(), b), g, &ctx, pair_b);
    CHECK(pair_b.empty());
    REQUIRE_FALSE(pair_a.empty());
    for (const auto& r : pair_a) CHECK(dual_gram(r) == ctx.h);
}

TEST_CASE("initial_framing") {
    CHECK(initial_framing(fixtures::order7_blocks()).framing.w == std::vector<int>{2, 2, 2, 1});
    IntMatrix c(5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) c(i, j) = i == j ? 5 : 1;
    CHECK(initial_framing(c).framing.w == std::vector<int>{5});
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        IntMatrix h = dual_gram(oracle::random_design(9, rng));
        InitialFraming f = initial_framing(h);
        CHECK(f.framing.total() == 9);
        // indices inside a frame are interchangeable in H
        IntMatrix hf = h.permuted(f.order);
        int start = 0;
        for (int w : f.framing.w) {
            for (int a = start; a < start + w; ++a)
                for (int b = a + 1; b < start + w; ++b) {
                    std::vector<int> swap(9);
                    std::iota(swap.begin(), swap.end(), 0);
                    std::swap(swap[a], swap[b]);
                    REQUIRE(hf.permuted(swap) == hf);
                }
            start += w;
        }
    }
    IntMatrix distinct{{3, 1, -1}, {1, 3, 3}, {-1, 3, 3}};
    CHECK(initial_framing(distinct).framing.w == std::vector<int>{1, 1, 1});
}

TEST_CASE("gram-pair identities for genuine designs") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 100; ++t) {
        int n = 3 + t % 11;
        SignMatrix r = oracle::random_design(n, rng);
        IntMatrix g = gram(r), h = dual_gram(r);
        auto ctx = GramPairContext::make(g, h);
        for (int k = 1; k <= n; ++k)
            for (int j : {1, 2}) REQUIRE(check_gram_pair(fixtures::prefix_state(r, ctx, k), ctx, j));
        // G^(j+1) = R H^j R^T as full matrices
        IntMatrix ri = r.to_int();
        for (int j = 0; j < std::min(n, 4); ++j) REQUIRE(matrix_power(g, j + 1) == ri * matrix_power(h, j) * ri.transpose());
    }
    // high powers, including j = n
    SignMatrix r = oracle::random_design(7, rng);
    std::vector<int> js(7);
    std::iota(js.begin(), js.end(), 1);
    auto ctx = GramPairContext::make(gram(r), dual_gram(r), js);
    for (int k = 1; k <= 7; ++k)
        for (int j : js) CHECK(check_gram_pair(fixtures::prefix_state(r, ctx, k), ctx, j));
}

TEST_CASE("gram-pair check rejects a pair that does not decompose") {
    auto c7 = census(7);
    auto pairs = enumerate_pairs(c7);
    bool found = false;
    for (const auto& p : pairs) {
        if (p.first == p.second) continue;
        const IntMatrix &g = c7[p.first], &h = c7[p.second];
        auto ctx = GramPairContext::make(g, h);
        if (decompose_first(ctx).status != DecompositionStatus::none) continue;
        auto rs = decompose_v1_oracle(g);
        if (rs.empty()) continue;
        found = true;
        // every R with R R^T = G fails the j = 1 check somewhere
        for (const auto& r : rs) {
            bool fails = false;
            for (int k = 1; k <= 7 && !fails; ++k) fails = !check_gram_pair(fixtures::prefix_state(r, ctx, k), ctx, 1);
            REQUIRE(fails);
        }
        break;
    }
    CHECK(found);
}

TEST_CASE("decompose variants on the order-7 example") {
    IntMatrix g = fixtures::order7_blocks();
    auto ctx = GramPairContext::make(g, g);
    CHECK(ctx.same_char_poly);
    auto first = decompose_first(ctx);
    REQUIRE(first.status == DecompositionStatus::solutions);
    REQUIRE(first.solutions.size() == 1);
    CHECK(gram(first.solutions[0]) == g);
    CHECK(dual_gram(first.solutions[0]) == g);
    // no budget cut the search short
    CHECK(first.exhaustive);

    auto all = decompose_all(ctx);
    REQUIRE(all.status == DecompositionStatus::solutions);
    CHECK(all.exhaustive);
    for (const auto& r : all.solutions) {
        REQUIRE(gram(r) == g);
        REQUIRE(dual_gram(r) == g);
    }
    std::set<SignMatrix> distinct(all.solutions.begin(), all.solutions.end());
    CHECK(distinct.size() == all.solutions.size());
    // rows are built +1 before -1 inside each frame, so solutions are listed
    // up to a column permutation; -R appears in that sense unless the sign is fixed
    std::set<SignMatrix> by_columns;
    for (const auto& r : all.solutions) by_columns.insert(sort_columns(r));
    for (const auto& r : all.solutions) {
        SignMatrix neg = r;
        for (int i = 0; i < 7; ++i) neg.negate_row(i);
        CHECK(by_columns.count(sort_columns(neg)) == 1);
    }
    DecomposeOptions fixed;
    fixed.fix_global_sign = true;
    CHECK(decompose_all(ctx, fixed).solutions.size() * 2 == all.solutions.size());

    DecomposeOptions tiny;
    tiny.node_budget = 2;
    auto cut = decompose_all(ctx, tiny);
    CHECK(cut.status == DecompositionStatus::timeout);
    CHECK(to_string(cut.status) != to_string(DecompositionStatus::none));

    auto r1 = decompose_random(ctx, 99, 1);
    auto r2 = decompose_random(ctx, 99, 1);
    CHECK(r1.nodes == r2.nodes);
    CHECK(r1.solutions == r2.solutions);
    for (const auto& r : r1.solutions) CHECK(gram(r) == g);
    CHECK_THROWS(decompose_random(ctx, 1, 0));
}

TEST_CASE("decompose_all agrees with the row-enumeration oracle") {
    for (int n : {3, 5, 7}) {
        auto list = census(n);
        if (list.size() > 40) list.resize(40);
        for (const auto& g : list) {
            auto ctx = GramPairContext::make(g, g);
            auto all = decompose_all(ctx);
            REQUIRE(all.status != DecompositionStatus::timeout);
            std::set<SignMatrix> a;
            for (const auto& r : all.solutions) {
                REQUIRE(gram(r) == g);
                REQUIRE(dual_gram(r) == g);
                a.insert(hadamard_canonical(r).canonical);
            }
            std::set<SignMatrix> b, sorted;
            std::map<IntMatrix, bool> same;
            for (const auto& r : decompose_v1_oracle(g)) {
                REQUIRE(gram(r) == g);
                if (!sorted.insert(sort_columns(r)).second) continue;
                IntMatrix h = dual_gram(r);
                auto it = same.find(h);
                if (it == same.end()) it = same.emplace(h, are_gram_equivalent(h, g)).first;
                if (it->second) b.insert(hadamard_canonical(r).canonical);
            }
            INFO(g.str());
            REQUIRE(a == b);
        }
    }
}

TEST_CASE("decompose_v1_oracle") {
    auto one = decompose_v1_oracle(IntMatrix{{1}});
    REQUIRE(one.size() == 1);
    CHECK(one[0] == SignMatrix::from_rows({{1}}));
    IntMatrix g3{{3, -1, -1}, {-1, 3, -1}, {-1, -1, 3}};
    auto three = decompose_v1_oracle(g3);
    CHECK_FALSE(three.empty());
    for (const auto& r : three) CHECK(gram(r) == g3);
    CHECK_THROWS(decompose_v1_oracle(IntMatrix::identity(11)));

    IntMatrix g = fixtures::order7_blocks();
    auto sols = decompose_v1_oracle(g);
    REQUIRE_FALSE(sols.empty());
    std::set<SignMatrix> set(sols.begin(), sols.end());
    std::mt19937_64 rng(5);
    for (const auto& r : sols) {
        std::vector<int> p(7);
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
        SignMatrix moved(7);
        for (int i = 0; i < 7; ++i)
            for (int c = 0; c < 7; ++c) moved.set(i, c, r(i, p[c]));
        REQUIRE(set.count(moved) == 1);
    }
}

TEST_CASE("enumerate_pairs") {
    IntMatrix a = fixtures::order7_blocks();
    std::vector<IntMatrix> dup{a, a};
    CHECK_THROWS(enumerate_pairs(dup));
    std::mt19937_64 rng(1);
    std::vector<IntMatrix> distinct;
    std::set<CharPoly> polys;
    while (distinct.size() < 6) {
        IntMatrix g = gram(oracle::random_design(7, rng));
        if (polys.insert(char_poly(g)).second) distinct.push_back(g);
    }
    auto pairs = enumerate_pairs(distinct);
    REQUIRE(pairs.size() == 6);
    for (const auto& p : pairs) CHECK(p.first == p.second);
    // G and a relabelled copy share the polynomial
    std::vector<IntMatrix> two{a, gram(oracle::random_design(7, rng)), a.permuted(std::vector<int>{0, 2, 1, 3, 4, 5, 6})};
    REQUIRE(two[2] != a);
    bool cross = false;
    for (const auto& p : enumerate_pairs(two)) cross |= p.first == 0 && p.second == 2;
    CHECK(cross);
}
