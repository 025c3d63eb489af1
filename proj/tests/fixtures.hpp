#pragma once

#include <vector>

#include "maxdet/decompose.hpp"
#include "maxdet/matrix.hpp"

namespace fixtures {

// Block matrix of order 7 with 3s in the diagonal blocks {0,1}, {2,3}, {4,5}.
inline maxdet::IntMatrix order7_blocks() {
    maxdet::IntMatrix g(7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) g(i, j) = i == j ? 7 : (i / 2 == j / 2 && i < 6 && j < 6 ? 3 : -1);
    return g;
}

// The level-3 state of the worked example: Q with frames (2,3,1,1).
inline maxdet::FrameState worked_state() {
    maxdet::FrameState s;
    s.k = 3;
    s.n = 7;
    s.q = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}};
    s.w.w = {2, 3, 1, 1};
    return s;
}

// The prefix held by `s` as a state with one frame per column, columns in
// the order the context uses for H.
inline maxdet::FrameState unit_state(const maxdet::FrameState& s, const maxdet::GramPairContext& ctx) {
    auto rows = s.expand();
    maxdet::FrameState out;
    out.k = s.k;
    out.n = s.n;
    out.w.w.assign(s.n, 1);
    for (const auto& row : rows) {
        std::vector<int> moved(s.n);
        for (int c = 0; c < s.n; ++c) moved[c] = row[ctx.order[c]];
        out.q.push_back(moved);
    }
    return out;
}

// Every completion of `s` found with maxdet::solve_frame_system alone, plus the pair
// checks for j = 1, 2 when a context is given.
inline void completions(const maxdet::FrameState& s, const maxdet::IntMatrix& g, const maxdet::GramPairContext* ctx, std::vector<maxdet::SignMatrix>& out) {
    if (s.k == s.n) {
        auto rows = s.expand();
        maxdet::SignMatrix r(s.n);
        for (int i = 0; i < s.n; ++i)
            for (int c = 0; c < s.n; ++c) r.set(i, c, rows[i][c]);
        out.push_back(r);
        return;
    }
    std::vector<long> rhs(s.k);
    for (int i = 0; i < s.k; ++i) rhs[i] = g(i, s.k).get_si();
    for (const auto& x : maxdet::solve_frame_system(s, rhs)) {
        maxdet::FrameState next = maxdet::refine_framing(s, x);
        if (ctx) {
            maxdet::FrameState u = unit_state(next, *ctx);
            if (!maxdet::check_gram_pair(u, *ctx, 1) || !maxdet::check_gram_pair(u, *ctx, 2)) continue;
        }
        completions(next, g, ctx, out);
    }
}

// State holding the first k rows of R, one frame per column, in the column
// order the context uses for H.
inline maxdet::FrameState prefix_state(const maxdet::SignMatrix& r, const maxdet::GramPairContext& ctx, int k) {
    const int n = r.order();
    maxdet::FrameState s;
    s.k = k;
    s.n = n;
    s.w.w.assign(n, 1);
    for (int i = 0; i < k; ++i) {
        std::vector<int> row(n);
        for (int c = 0; c < n; ++c) row[c] = r(i, ctx.order[c]);
        s.q.push_back(row);
    }
    return s;
}

}  // namespace fixtures
