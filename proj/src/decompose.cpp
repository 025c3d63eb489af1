#include "maxdet/decompose.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace maxdet {

int Framing::total() const { return std::accumulate(w.begin(), w.end(), 0); }

FrameState FrameState::initial(const Framing& framing) {
    for (int v : framing.w)
        if (v < 1) throw std::invalid_argument("frame widths must be positive");
    FrameState s;
    s.k = 0;
    s.n = framing.total();
    s.w = framing;
    return s;
}

std::vector<std::vector<int>> FrameState::expand() const {
    std::vector<std::vector<int>> rows(k);
    for (int r = 0; r < k; ++r) {
        rows[r].reserve(n);
        for (int i = 0; i < w.size(); ++i) rows[r].insert(rows[r].end(), w.w[i], q[r][i]);
    }
    return rows;
}

namespace {

struct Overflow {};

int128 checked_mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
    return r;
}
int128 checked_sub(int128 a, int128 b) {
    int128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw Overflow{};
    return r;
}
int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
    return r;
}
int128 abs_of(int128 a) { return a < 0 ? -a : a; }
int128 gcd_of(int128 a, int128 b) {
    a = abs_of(a);
    b = abs_of(b);
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int to_small(int128 v) { return static_cast<int>(v); }
int to_small(const BigInt& v) { return static_cast<int>(v.get_si()); }

BigInt checked_mul(const BigInt& a, const BigInt& b) { return a * b; }
BigInt checked_sub(const BigInt& a, const BigInt& b) { return a - b; }
BigInt checked_add(const BigInt& a, const BigInt& b) { return a + b; }
BigInt abs_of(const BigInt& a) { return abs(a); }
BigInt gcd_of(const BigInt& a, const BigInt& b) {
    BigInt g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

// Integer points of { x : A x = b, 0 <= x <= w } after fraction-free
// Gauss-Jordan elimination: basic variables follow from the non-basic ones.
template <class Int>
class FrameSolver {
public:
    FrameSolver(const std::vector<std::vector<int>>& q, const std::vector<long>& b, const std::vector<int>& w) : w_(w), m_(static_cast<int>(w.size())) {
        const int k = static_cast<int>(q.size());
        std::vector<std::vector<Int>> a(k, std::vector<Int>(m_));
        std::vector<Int> rhs(k);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < m_; ++j) a[i][j] = q[i][j];
            rhs[i] = b[i];
        }
        std::vector<bool> used(m_, false);
        std::vector<int> pivot_of_row(k, -1);
        for (int i = 0; i < k; ++i) {
            int c = -1;
            Int best = 0;
            for (int j = 0; j < m_; ++j) {
                if (used[j] || a[i][j] == 0) continue;
                Int score = checked_mul(abs_of(a[i][j]), Int(w_[j]));
                if (c < 0 || score > best) {
                    c = j;
                    best = score;
                }
            }
            if (c < 0) {
                if (rhs[i] != 0) {
                    inconsistent_ = true;
                    return;
                }
                continue;
            }
            used[c] = true;
            pivot_of_row[i] = c;
            if (a[i][c] < 0) {
                for (auto& v : a[i]) v = -v;
                rhs[i] = -rhs[i];
            }
            for (int t = 0; t < k; ++t) {
                if (t == i || a[t][c] == 0) continue;
                const Int p = a[i][c];
                const Int f = a[t][c];
                Int g = 0;
                for (int j = 0; j < m_; ++j) {
                    a[t][j] = checked_sub(checked_mul(p, a[t][j]), checked_mul(f, a[i][j]));
                    g = gcd_of(g, a[t][j]);
                }
                rhs[t] = checked_sub(checked_mul(p, rhs[t]), checked_mul(f, rhs[i]));
                if (g == 0) continue;
                if (rhs[t] % g != 0) {
                    inconsistent_ = true;  // no integer point on this row
                    return;
                }
                for (auto& v : a[t]) v /= g;
                rhs[t] /= g;
            }
        }
        for (int i = 0; i < k; ++i) {
            if (pivot_of_row[i] >= 0) {
                rows_.push_back(std::move(a[i]));
                rhs_.push_back(rhs[i]);
                pivots_.push_back(pivot_of_row[i]);
            } else {
                // dependent row: must now read 0 = 0
                bool zero = std::all_of(a[i].begin(), a[i].end(), [](const Int& v) { return v == 0; });
                if (!zero || rhs[i] != 0) {
                    inconsistent_ = true;
                    return;
                }
            }
        }
        for (int j = 0; j < m_; ++j)
            if (!used[j]) free_.push_back(j);
        const int rank = static_cast<int>(rows_.size());
        const int nf = static_cast<int>(free_.size());
        lo_.assign(rank, std::vector<Int>(nf + 1, 0));
        hi_.assign(rank, std::vector<Int>(nf + 1, 0));
        for (int r = 0; r < rank; ++r)
            for (int p = nf - 1; p >= 0; --p) {
                Int term = checked_mul(rows_[r][free_[p]], Int(w_[free_[p]]));
                lo_[r][p] = checked_add(lo_[r][p + 1], term < 0 ? term : Int(0));
                hi_[r][p] = checked_add(hi_[r][p + 1], term > 0 ? term : Int(0));
            }
    }

    std::vector<std::vector<int>> solve() {
        std::vector<std::vector<int>> out;
        if (inconsistent_) return out;
        x_.assign(m_, 0);
        sums_.assign(rows_.size(), Int(0));
        enumerate(0, out);
        return out;
    }

private:
    bool feasible(int p) const {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            // numerator of the basic variable lies in [rhs - S - hi, rhs - S - lo]
            Int base = rhs_[r] - sums_[r];
            Int top = base - lo_[r][p];
            Int bottom = base - hi_[r][p];
            Int cap = rows_[r][pivots_[r]] * w_[pivots_[r]];
            if (top < 0 || bottom > cap) return false;
        }
        return true;
    }

    void enumerate(int p, std::vector<std::vector<int>>& out) {
        if (!feasible(p)) return;
        if (p == static_cast<int>(free_.size())) {
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                Int num = rhs_[r] - sums_[r];
                const Int& piv = rows_[r][pivots_[r]];
                if (num % piv != 0) return;
                Int v = num / piv;
                if (v < 0 || v > w_[pivots_[r]]) return;
                x_[pivots_[r]] = to_small(v);
            }
            out.push_back(x_);
            return;
        }
        const int j = free_[p];
        for (int v = 0; v <= w_[j]; ++v) {
            x_[j] = v;
            for (std::size_t r = 0; r < rows_.size(); ++r) sums_[r] += rows_[r][j] * v;
            enumerate(p + 1, out);
            for (std::size_t r = 0; r < rows_.size(); ++r) sums_[r] -= rows_[r][j] * v;
        }
        x_[j] = 0;
    }

    const std::vector<int>& w_;
    int m_;
    bool inconsistent_ = false;
    std::vector<std::vector<Int>> rows_;
    std::vector<Int> rhs_;
    std::vector<int> pivots_;
    std::vector<int> free_;
    std::vector<std::vector<Int>> lo_;
    std::vector<std::vector<Int>> hi_;
    std::vector<int> x_;
    std::vector<Int> sums_;
};

}  // namespace

std::vector<std::vector<int>> solve_frame_system(const FrameState& state, std::span<const long> rhs) {
    const int k = state.k;
    const int m = state.w.size();
    if (static_cast<int>(rhs.size()) != k) throw std::invalid_argument("solve_frame_system: rhs length must equal the number of known rows");
    // Q (2x - w) = rhs  <=>  Q x = (rhs + Q w) / 2
    std::vector<long> b(k);
    for (int i = 0; i < k; ++i) {
        long qw = 0;
        for (int j = 0; j < m; ++j) qw += state.q[i][j] * state.w.w[j];
        const long t = rhs[i] + qw;
        if (t % 2 != 0) return {};
        b[i] = t / 2;
    }
    try {
        return FrameSolver<int128>(state.q, b, state.w.w).solve();
    } catch (const Overflow&) {
        return FrameSolver<BigInt>(state.q, b, state.w.w).solve();
    }
}

FrameState refine_framing(const FrameState& state, std::span<const int> x) {
    const int m = state.w.size();
    if (static_cast<int>(x.size()) != m) throw std::invalid_argument("refine_framing: one value per frame");
    FrameState out;
    out.n = state.n;
    out.k = state.k + 1;
    out.q.assign(out.k, {});
    for (int i = 0; i < m; ++i) {
        if (x[i] < 0 || x[i] > state.w.w[i]) throw std::invalid_argument("refine_framing: frame value out of range");
        for (int part = 0; part < 2; ++part) {
            const int width = part == 0 ? x[i] : state.w.w[i] - x[i];
            if (width == 0) continue;
            out.w.w.push_back(width);
            for (int r = 0; r < state.k; ++r) out.q[r].push_back(state.q[r][i]);
            out.q[state.k].push_back(part == 0 ? 1 : -1);
        }
    }
    return out;
}

InitialFraming initial_framing(const IntMatrix& h) {
    const int n = h.order();
    if (!h.is_symmetric()) throw std::invalid_argument("initial_framing: H must be symmetric");
    std::vector<int> cls(n, -1);
    std::vector<std::vector<int>> classes;
    for (int v = 0; v < n; ++v) {
        if (cls[v] >= 0) continue;
        cls[v] = static_cast<int>(classes.size());
        classes.push_back({v});
        for (int u = v + 1; u < n; ++u) {
            if (cls[u] >= 0 || h(u, u) != h(v, v)) continue;
            bool twin = true;
            for (int t = 0; t < n && twin; ++t)
                if (t != u && t != v && h(u, t) != h(v, t)) twin = false;
            if (twin) {
                cls[u] = cls[v];
                classes.back().push_back(u);
            }
        }
    }
    InitialFraming out;
    for (const auto& c : classes) {
        out.framing.w.push_back(static_cast<int>(c.size()));
        out.order.insert(out.order.end(), c.begin(), c.end());
    }
    return out;
}

GramPairContext GramPairContext::make(const IntMatrix& g, const IntMatrix& h, std::vector<int> jset) {
    if (g.order() != h.order()) throw std::invalid_argument("GramPairContext: G and H differ in order");
    if (!g.is_symmetric() || !h.is_symmetric()) throw std::invalid_argument("GramPairContext: G and H must be symmetric");
    for (int j : jset)
        if (j < 1) throw std::invalid_argument("GramPairContext: Gram-pair degrees must be >= 1");
    GramPairContext ctx;
    ctx.g = g;
    ctx.h = h;
    auto init = initial_framing(h);
    ctx.order = init.order;
    ctx.framing = init.framing;
    ctx.h_framed = h.permuted(ctx.order);
    ctx.jset = std::move(jset);
    for (int j : ctx.jset) {
        ctx.g_pow.push_back(matrix_power(g, j + 1));
        ctx.h_pow.push_back(matrix_power(ctx.h_framed, j));
    }
    ctx.same_char_poly = char_poly(g) == char_poly(h);
    return ctx;
}

bool check_gram_pair(const FrameState& state, const GramPairContext& ctx, int j) {
    const int n = ctx.g.order();
    if (state.n != n) throw std::invalid_argument("check_gram_pair: order mismatch");
    IntMatrix gp = matrix_power(ctx.g, j + 1);
    IntMatrix hp = matrix_power(ctx.h_framed, j);
    auto rows = state.expand();
    const int k = state.k;
    std::vector<std::vector<BigInt>> hr(k, std::vector<BigInt>(n));
    for (int b = 0; b < k; ++b)
        for (int i = 0; i < n; ++i) {
            BigInt acc = 0;
            for (int t = 0; t < n; ++t) acc += hp(i, t) * rows[b][t];
            hr[b][i] = acc;
        }
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
            BigInt acc = 0;
            for (int i = 0; i < n; ++i) acc += hr[b][i] * rows[a][i];
            if (acc != gp(a, b)) return false;
        }
    return true;
}

std::string to_string(DecompositionStatus status) {
    switch (status) {
        case DecompositionStatus::solutions: return "solutions";
        case DecompositionStatus::none: return "none";
        case DecompositionStatus::timeout: return "timeout";
    }
    return "?";
}

namespace {

enum class Mode { first, all, random };

// Powers as machine integers when every dot product stays far from overflow.
struct PairTables {
    bool small = true;
    std::vector<std::vector<std::int64_t>> g;  // per j, n*n
    std::vector<std::vector<std::int64_t>> h;
};

PairTables make_tables(const GramPairContext& ctx) {
    PairTables t;
    const int n = ctx.g.order();
    const BigInt limit = BigInt(1) << 40;
    for (std::size_t k = 0; k < ctx.jset.size(); ++k) {
        std::vector<std::int64_t> gv(static_cast<std::size_t>(n) * n);
        std::vector<std::int64_t> hv(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const BigInt& a = ctx.g_pow[k](i, j);
                const BigInt& b = ctx.h_pow[k](i, j);
                if (abs(a) > limit * n * n || abs(b) > limit) t.small = false;
                if (t.small) {
                    gv[static_cast<std::size_t>(i) * n + j] = a.get_si();
                    hv[static_cast<std::size_t>(i) * n + j] = b.get_si();
                }
            }
        t.g.push_back(std::move(gv));
        t.h.push_back(std::move(hv));
    }
    return t;
}

class Searcher {
public:
    Searcher(const GramPairContext& ctx, const DecomposeOptions& opts, Mode mode, std::uint64_t seed, int fanout)
        : ctx_(ctx), opts_(opts), mode_(mode), rng_(seed), fanout_(fanout), tables_(make_tables(ctx)), n_(ctx.g.order()) {
        start_ = std::chrono::steady_clock::now();
    }

    DecompositionOutcome run() {
        DecompositionOutcome out;
        if (!ctx_.same_char_poly) {
            out.status = DecompositionStatus::none;
            out.exhaustive = true;
            return out;
        }
        if (mode_ == Mode::random) {
            if (opts_.node_budget == 0 && opts_.seconds_budget <= 0) default_budget_ = 1000000;
            for (;;) {
                truncated_ = false;
                descend(FrameState::initial(ctx_.framing), {});
                if (!solutions_.empty() || stopped_) break;
                if (!truncated_) {
                    exhausted_tree_ = true;
                    break;
                }
            }
        } else {
            descend(FrameState::initial(ctx_.framing), {});
            exhausted_tree_ = !stopped_ || (mode_ == Mode::first && !solutions_.empty() && !budget_hit_);
        }
        out.nodes = nodes_;
        out.max_level = max_level_;
        out.solutions = std::move(solutions_);
        out.exhaustive = !budget_hit_ && (mode_ != Mode::random || exhausted_tree_);
        if (!out.solutions.empty()) out.status = DecompositionStatus::solutions;
        else if (budget_hit_) out.status = DecompositionStatus::timeout;
        else out.status = DecompositionStatus::none;
        if (mode_ == Mode::random && out.solutions.empty() && !exhausted_tree_) out.status = DecompositionStatus::timeout;
        return out;
    }

private:
    bool over_budget() {
        const std::uint64_t nb = opts_.node_budget ? opts_.node_budget : default_budget_;
        if (nb && nodes_ >= nb) return true;
        if (opts_.seconds_budget > 0 && (nodes_ & 255U) == 0) {
            double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            if (el > opts_.seconds_budget) return true;
        }
        return false;
    }

    bool pair_ok(const std::vector<std::vector<int>>& rows, const std::vector<int>& row) {
        const int k = static_cast<int>(rows.size());  // index of the new row
        for (std::size_t t = 0; t < ctx_.jset.size(); ++t) {
            if (tables_.small) {
                const auto& hp = tables_.h[t];
                const auto& gp = tables_.g[t];
                std::vector<std::int64_t> v(n_);
                for (int i = 0; i < n_; ++i) {
                    std::int64_t acc = 0;
                    const std::int64_t* hrow = &hp[static_cast<std::size_t>(i) * n_];
                    for (int c = 0; c < n_; ++c) acc += hrow[c] * row[c];
                    v[i] = acc;
                }
                auto dot = [&](const std::vector<int>& r) {
                    std::int64_t acc = 0;
                    for (int i = 0; i < n_; ++i) acc += v[i] * r[i];
                    return acc;
                };
                if (dot(row) != gp[static_cast<std::size_t>(k) * n_ + k]) return false;
                for (int i = 0; i < k; ++i)
                    if (dot(rows[i]) != gp[static_cast<std::size_t>(i) * n_ + k]) return false;
            } else {
                const auto& hp = ctx_.h_pow[t];
                const auto& gp = ctx_.g_pow[t];
                std::vector<BigInt> v(n_);
                for (int i = 0; i < n_; ++i) {
                    BigInt acc = 0;
                    for (int c = 0; c < n_; ++c) acc += hp(i, c) * row[c];
                    v[i] = acc;
                }
                auto dot = [&](const std::vector<int>& r) {
                    BigInt acc = 0;
                    for (int i = 0; i < n_; ++i) acc += v[i] * r[i];
                    return acc;
                };
                if (dot(row) != gp(k, k)) return false;
                for (int i = 0; i < k; ++i)
                    if (dot(rows[i]) != gp(i, k)) return false;
            }
        }
        return true;
    }

    static std::vector<int> expand_row(const Framing& w, const std::vector<int>& x) {
        std::vector<int> row;
        for (int i = 0; i < w.size(); ++i) {
            row.insert(row.end(), x[i], 1);
            row.insert(row.end(), w.w[i] - x[i], -1);
        }
        return row;
    }

    void record(const std::vector<std::vector<int>>& rows) {
        SignMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int c = 0; c < n_; ++c) r.set(i, ctx_.order[c], rows[i][c]);
        solutions_.push_back(std::move(r));
        if (mode_ != Mode::all) stopped_ = true;
    }

    void descend(const FrameState& state, std::vector<std::vector<int>> rows) {
        if (stopped_) return;
        if (over_budget()) {
            stopped_ = true;
            budget_hit_ = true;
            return;
        }
        ++nodes_;
        max_level_ = std::max(max_level_, state.k);
        if (state.k == n_) {
            record(rows);
            return;
        }
        const int k = state.k;
        std::vector<long> rhs(k);
        for (int i = 0; i < k; ++i) rhs[i] = ctx_.g(i, k).get_si();
        auto xs = solve_frame_system(state, rhs);
        std::vector<std::pair<std::vector<int>, std::vector<int>>> kids;
        for (auto& x : xs) {
            if (k == 0 && opts_.fix_global_sign && !sign_representative(state.w, x)) continue;
            auto row = expand_row(state.w, x);
            if (!pair_ok(rows, row)) continue;
            kids.emplace_back(std::move(x), std::move(row));
        }
        if (mode_ == Mode::random && fanout_ > 0 && static_cast<int>(kids.size()) > fanout_) {
            std::shuffle(kids.begin(), kids.end(), rng_);
            kids.resize(static_cast<std::size_t>(fanout_));
            truncated_ = true;
        } else if (mode_ == Mode::random) {
            std::shuffle(kids.begin(), kids.end(), rng_);
        }
        for (auto& [x, row] : kids) {
            if (stopped_) return;
            rows.push_back(row);
            descend(refine_framing(state, x), rows);
            rows.pop_back();
        }
    }

    // Of R and -R keep the one whose first row, read frame by frame, has
    // more +1 entries at the first frame where the two differ.
    static bool sign_representative(const Framing& w, const std::vector<int>& x) {
        for (int i = 0; i < w.size(); ++i) {
            const int minus = w.w[i] - x[i];
            if (x[i] != minus) return x[i] > minus;
        }
        return true;
    }

    const GramPairContext& ctx_;
    DecomposeOptions opts_;
    Mode mode_;
    std::mt19937_64 rng_;
    int fanout_;
    PairTables tables_;
    int n_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t default_budget_ = 0;
    std::uint64_t nodes_ = 0;
    int max_level_ = 0;
    bool stopped_ = false;
    bool budget_hit_ = false;
    bool truncated_ = false;
    bool exhausted_tree_ = false;
    std::vector<SignMatrix> solutions_;
};

}  // namespace

DecompositionOutcome decompose_first(const GramPairContext& ctx, const DecomposeOptions& opts) {
    return Searcher(ctx, opts, Mode::first, 0, 0).run();
}

DecompositionOutcome decompose_all(const GramPairContext& ctx, const DecomposeOptions& opts) {
    return Searcher(ctx, opts, Mode::all, 0, 0).run();
}

DecompositionOutcome decompose_random(const GramPairContext& ctx, std::uint64_t seed, int fanout, const DecomposeOptions& opts) {
    if (fanout < 1) throw std::invalid_argument("decompose_random: fanout must be positive");
    return Searcher(ctx, opts, Mode::random, seed, fanout).run();
}

std::vector<CandidatePair> enumerate_pairs(std::span<const IntMatrix> candidates) {
    std::set<IntMatrix> seen;
    for (const auto& m : candidates)
        if (!seen.insert(m).second) throw std::invalid_argument("enumerate_pairs: repeated candidate matrix");
    std::map<CharPoly, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < candidates.size(); ++i) groups[char_poly(candidates[i])].push_back(i);
    std::vector<CandidatePair> out;
    for (const auto& [poly, idx] : groups)
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a; b < idx.size(); ++b) out.push_back({idx[a], idx[b]});
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return std::pair(x.first, x.second) < std::pair(y.first, y.second); });
    return out;
}

std::vector<SignMatrix> decompose_v1_oracle(const IntMatrix& g, int max_order) {
    const int n = g.order();
    if (n < 1 || n > max_order) throw std::invalid_argument("decompose_v1_oracle: order outside the oracle limit");
    if (n > 20) throw std::invalid_argument("decompose_v1_oracle: order too large for row enumeration");
    for (int i = 0; i < n; ++i)
        if (g(i, i) != n) return {};
    std::vector<std::vector<int>> all_rows;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        std::vector<int> r(n);
        for (int c = 0; c < n; ++c) r[c] = (mask >> c) & 1U ? -1 : 1;
        all_rows.push_back(std::move(r));
    }
    std::vector<long> target(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!g(i, j).fits_slong_p()) return {};
            target[static_cast<std::size_t>(i) * n + j] = g(i, j).get_si();
        }
    std::vector<SignMatrix> out;
    std::vector<const std::vector<int>*> rows{&all_rows[0]};
    auto rec = [&](auto&& self) -> void {
        const int k = static_cast<int>(rows.size());
        if (k == n) {
            SignMatrix r(n);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < n; ++c) r.set(i, c, (*rows[i])[c]);
            out.push_back(std::move(r));
            return;
        }
        for (const auto& cand : all_rows) {
            bool ok = true;
            for (int i = 0; i < k && ok; ++i) {
                long dot = 0;
                for (int c = 0; c < n; ++c) dot += (*rows[i])[c] * cand[c];
                ok = dot == target[static_cast<std::size_t>(i) * n + k];
            }
            if (!ok) continue;
            rows.push_back(&cand);
            self(self);
            rows.pop_back();
        }
    };
    rec(rec);
    return out;
}

}  // namespace maxdet
