#include "maxdet/spectrum.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "maxdet/bounds.hpp"
#include "maxdet/gram_search.hpp"

namespace maxdet {

BigInt scaled_det(const SignMatrix& r) {
    BigInt d = abs(det_sign(r));
    if (r.order() > 1) d >>= (r.order() - 1);
    return d;
}

namespace {

// A sign matrix with its determinant and adjugate kept exact under single
// entry flips (rank-one updates), valid while the determinant is nonzero.
class FlipState {
public:
    explicit FlipState(const SignMatrix& r) : r_(r), n_(r.order()), adj_(static_cast<std::size_t>(n_) * n_) {
        IntMatrix m = r.to_int();
        det_ = to_int128(det_exact(m));
        IntMatrix a = adjugate(m);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) adj_[idx(i, j)] = to_int128(a(i, j));
    }

    const SignMatrix& matrix() const { return r_; }
    int128 det() const { return det_; }
    // Determinant after flipping entry (i, j).
    int128 det_after(int i, int j) const { return det_ - 2 * r_(i, j) * adj_[idx(j, i)]; }

    void flip(int i, int j) {
        int128 delta = -2 * r_(i, j);
        int128 next = det_ + delta * adj_[idx(j, i)];
        std::vector<int128> col(n_), row(n_);
        for (int t = 0; t < n_; ++t) {
            col[t] = adj_[idx(t, i)];
            row[t] = adj_[idx(j, t)];
        }
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) adj_[idx(a, b)] = (next * adj_[idx(a, b)] - delta * col[a] * row[b]) / det_;
        det_ = next;
        r_.flip(i, j);
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    SignMatrix r_;
    int n_;
    int128 det_ = 0;
    std::vector<int128> adj_;
};

SignMatrix random_sign_matrix(int n, std::mt19937_64& rng) {
    SignMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.set(i, j, (rng() & 1) ? 1 : -1);
    return r;
}

int128 abs128(int128 v) { return v < 0 ? -v : v; }

}  // namespace

std::map<BigInt, SignMatrix> hill_climb_values(int n, const std::set<BigInt>& targets, const HillClimbOptions& opts) {
    if (n < 1 || n > 25) throw std::invalid_argument("hill_climb_values: order must be in [1, 25]");
    std::map<BigInt, SignMatrix> found;
    std::set<BigInt> missing = targets;
    if (missing.empty()) return found;

    std::mt19937_64 rng(opts.seed);
    const std::uint64_t nn = static_cast<std::uint64_t>(n) * n;
    const std::uint64_t restart_every = opts.restart_every ? opts.restart_every : 8 * nn;
    const std::uint64_t budget = opts.steps ? opts.steps : 8000 * nn;
    const std::uint64_t stall = opts.stall ? opts.stall : 3000 * nn;
    std::uint64_t steps = 0, last_new = 0;
    const int shift = n - 1;
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    auto note = [&](int128 det, const FlipState& s, int fi, int fj) {
        BigInt v = to_big(abs128(det) >> shift);
        if (!missing.count(v)) return;
        SignMatrix w = s.matrix();
        if (fi >= 0) w.flip(fi, fj);
        found.emplace(v, w);
        missing.erase(v);
        last_new = steps;
    };

    auto running = [&] { return steps < budget && steps - last_new < stall && !missing.empty(); };
    while (running()) {
        SignMatrix start = random_sign_matrix(n, rng);
        if (det_sign(start) == 0) {
            ++steps;
            continue;
        }
        FlipState state(start);
        note(state.det(), state, -1, -1);
        auto choose = [&] {
            auto it = missing.begin();
            std::advance(it, static_cast<long>(rng() % missing.size()));
            return *it;
        };
        BigInt aim = choose();
        int128 target = to_int128(BigInt(aim << shift));
        int last_i = -1, last_j = -1;

        for (std::uint64_t k = 0; k < restart_every && running(); ++k, ++steps) {
            int best_i = -1, best_j = -1;
            int128 best_gap = 0;
            int ties = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    int128 d = state.det_after(i, j);
                    note(d, state, i, j);
                    if (d == 0 || (i == last_i && j == last_j)) continue;
                    int128 gap = abs128(abs128(d) - target);
                    if (best_i < 0 || gap < best_gap) {
                        best_i = i, best_j = j, best_gap = gap, ties = 1;
                    } else if (gap == best_gap && rng() % ++ties == 0) {
                        best_i = i, best_j = j;
                    }
                }
            if (missing.empty()) break;
            if (!missing.count(aim)) {
                aim = choose();
                target = to_int128(BigInt(aim << shift));
            }
            if (coin(rng) < opts.noise || best_i < 0) {
                // random non-singular flip
                for (int attempt = 0; attempt < 4 * n * n; ++attempt) {
                    int i = static_cast<int>(rng() % n), j = static_cast<int>(rng() % n);
                    if (state.det_after(i, j) != 0) {
                        best_i = i, best_j = j;
                        break;
                    }
                }
                if (best_i < 0) break;
            }
            state.flip(best_i, best_j);
            last_i = best_i, last_j = best_j;
        }
    }
    return found;
}

SpectrumAbove spectrum_above(int n, const BigInt& d_min, const SpectrumAboveOptions& opts) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("spectrum_above: n must be odd");
    SearchConfig cfg;
    cfg.n = n;
    cfg.d_min = d_min;
    cfg.workers = opts.workers;
    SearchResult search = search_grams(cfg);

    SpectrumAbove out;
    out.candidates = search.candidates.size();
    std::vector<IntMatrix> grams;
    for (const auto& c : search.candidates) grams.push_back(c.m);
    auto pairs = enumerate_pairs(grams);
    out.pairs = pairs.size();
    const int shift = n - 1;
    for (const auto& p : pairs) {
        BigInt root;
        is_square(search.candidates[p.first].det, &root);
        BigInt value = root >> shift;
        if (opts.skip_known_values && out.values.count(value)) continue;
        ++out.pairs_tried;
        auto ctx = GramPairContext::make(grams[p.first], grams[p.second]);
        auto res = decompose_first(ctx, opts.decompose);
        if (res.status == DecompositionStatus::timeout) {
            ++out.timeouts;
            out.complete = false;
        } else if (res.status == DecompositionStatus::solutions) {
            const SignMatrix& w = res.solutions.front();
            if (scaled_det(w) != value) throw std::logic_error("spectrum_above: witness determinant mismatch");
            out.values.emplace(value, w);
        }
    }
    return out;
}

SpectrumResult full_spectrum(int n, const FullSpectrumOptions& opts) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("full_spectrum: n must be odd");
    if (n > opts.max_order) throw std::invalid_argument("full_spectrum: order above the configured limit");
    SpectrumResult out;
    out.n = n;

    BigInt top = 1;
    if (n > 1) {
        BoundValue b = (n % 4 == 3) ? ehlich_bound(n) : ehlich_barba_bound(n);
        top = b.floor_root() >> (n - 1);
    }
    std::set<BigInt> targets;
    for (BigInt v = 0; v <= top; ++v) targets.insert(v);
    auto climbed = hill_climb_values(n, targets, opts.climb);

    BigInt gap = 0;
    while (climbed.count(gap)) ++gap;
    out.first_gap = gap;

    BigInt d_min = (n == 1) ? gap : BigInt(gap << (n - 1));
    if (d_min == 0) d_min = 1;
    SpectrumAbove above = spectrum_above(n, d_min, opts.above);
    out.complete_above = above.complete;

    for (const auto& [v, w] : climbed) {
        if (v < gap) {
            out.values.emplace(v, SpectrumEntry{w, ValueSource::heuristic});
        } else if (above.complete && !above.values.count(v)) {
            throw std::logic_error("full_spectrum: local search found a value the exhaustive phase excludes");
        }
    }
    for (const auto& [v, w] : above.values) out.values.emplace(v, SpectrumEntry{w, ValueSource::decomposition});
    return out;
}

std::string compress_values(const std::set<BigInt>& values) {
    std::ostringstream os;
    bool first = true;
    for (auto it = values.begin(); it != values.end();) {
        BigInt last = *it;
        auto next = std::next(it);
        while (next != values.end() && *next == last + 1) {
            last = *next;
            ++next;
        }
        BigInt len = last - *it + 1;
        auto emit = [&](const std::string& s) {
            if (!first) os << ", ";
            os << s;
            first = false;
        };
        if (len >= 3) {
            emit(it->get_str() + ".." + last.get_str());
        } else {
            for (auto k = it; k != next; ++k) emit(k->get_str());
        }
        it = next;
    }
    return os.str();
}

std::set<BigInt> expand_values(const std::string& text) {
    std::set<BigInt> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
        if (item.empty()) continue;
        auto dots = item.find("..");
        try {
            if (dots == std::string::npos) {
                out.insert(BigInt(item));
            } else {
                BigInt a(item.substr(0, dots)), b(item.substr(dots + 2));
                for (BigInt v = a; v <= b; ++v) out.insert(v);
            }
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("expand_values: bad item '" + item + "'");
        }
    }
    return out;
}

}  // namespace maxdet
