#include "maxdet/equivalence.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace maxdet {

void ColouredGraph::set(int i, int j, std::int64_t colour) {
    c_[static_cast<std::size_t>(i) * size_ + j] = colour;
    c_[static_cast<std::size_t>(j) * size_ + i] = colour;
}

namespace {

// Ordered partition of the vertices: cells are contiguous ranges of `lab`.
struct Partition {
    std::vector<int> lab;
    std::vector<int> cell_end;  // valid at cell starts
    std::vector<int> cell_of;   // vertex -> start of its cell

    bool discrete() const {
        for (int s = 0; s < static_cast<int>(lab.size()); s = cell_end[s])
            if (cell_end[s] - s > 1) return false;
        return true;
    }
};

class Labeller {
public:
    explicit Labeller(const ColouredGraph& g) : g_(g), n_(g.size()) {}

    CanonicalLabelling run() {
        CanonicalLabelling out;
        if (n_ == 0) return out;
        Partition p;
        p.lab.resize(n_);
        std::iota(p.lab.begin(), p.lab.end(), 0);
        std::stable_sort(p.lab.begin(), p.lab.end(), [&](int a, int b) { return g_(a, a) < g_(b, b); });
        p.cell_end.assign(n_, 0);
        p.cell_of.assign(n_, 0);
        std::vector<int> queue;
        for (int i = 0; i < n_;) {
            int j = i;
            while (j < n_ && g_(p.lab[j], p.lab[j]) == g_(p.lab[i], p.lab[i])) ++j;
            p.cell_end[i] = j;
            for (int k = i; k < j; ++k) p.cell_of[p.lab[k]] = i;
            queue.push_back(i);
            i = j;
        }
        refine(p, queue);
        std::vector<int> prefix;
        search(p, prefix);
        out.lab = best_lab_;
        out.leaves = leaves_;
        out.automorphisms = gens_.size();
        return out;
    }

private:
    // Split cells until every vertex of a cell sees every other cell the same way.
    void refine(Partition& p, std::vector<int> queue) const {
        std::vector<char> queued(n_, 0);
        for (int s : queue) queued[s] = 1;
        std::vector<std::pair<std::vector<std::int64_t>, int>> keyed;
        std::size_t head = 0;
        while (head < queue.size()) {
            int ws = queue[head++];
            queued[ws] = 0;
            int we = p.cell_end[ws];
            std::vector<int> w(p.lab.begin() + ws, p.lab.begin() + we);
            for (int xs = 0; xs < n_;) {
                int xe = p.cell_end[xs];
                if (xe - xs == 1) {
                    xs = xe;
                    continue;
                }
                keyed.clear();
                for (int k = xs; k < xe; ++k) {
                    int v = p.lab[k];
                    std::vector<std::int64_t> key;
                    key.reserve(w.size());
                    for (int u : w)
                        if (u != v) key.push_back(g_(v, u));
                    std::sort(key.begin(), key.end());
                    keyed.emplace_back(std::move(key), v);
                }
                std::stable_sort(keyed.begin(), keyed.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                if (keyed.front().first == keyed.back().first) {
                    xs = xe;
                    continue;
                }
                int start = xs;
                for (std::size_t k = 0; k < keyed.size(); ++k) {
                    p.lab[xs + k] = keyed[k].second;
                    bool last = k + 1 == keyed.size() || keyed[k + 1].first != keyed[k].first;
                    if (last) {
                        int end = xs + static_cast<int>(k) + 1;
                        p.cell_end[start] = end;
                        for (int t = start; t < end; ++t) p.cell_of[p.lab[t]] = start;
                        if (!queued[start]) {
                            queued[start] = 1;
                            queue.push_back(start);
                        }
                        start = end;
                    }
                }
                xs = xe;
            }
        }
    }

    std::vector<std::int64_t> certificate(const std::vector<int>& lab) const {
        std::vector<std::int64_t> c(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) c[static_cast<std::size_t>(i) * n_ + j] = g_(lab[i], lab[j]);
        return c;
    }

    static int common_prefix(const std::vector<int>& a, const std::vector<int>& b) {
        std::size_t k = 0;
        while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
        return static_cast<int>(k);
    }

    void record_automorphism(const std::vector<int>& from, const std::vector<int>& to) {
        std::vector<int> gamma(n_);
        for (int k = 0; k < n_; ++k) gamma[from[k]] = to[k];
        gens_.push_back(std::move(gamma));
    }

    // Returns the level the search should resume at.
    int leaf(const Partition& p, const std::vector<int>& prefix) {
        ++leaves_;
        auto cert = certificate(p.lab);
        int level = static_cast<int>(prefix.size());
        if (first_lab_.empty()) {
            first_lab_ = best_lab_ = p.lab;
            first_path_ = best_path_ = prefix;
            first_cert_ = cert;
            best_cert_ = std::move(cert);
            return level;
        }
        if (cert == first_cert_) {
            record_automorphism(first_lab_, p.lab);
            return common_prefix(prefix, first_path_);
        }
        if (cert == best_cert_) {
            record_automorphism(best_lab_, p.lab);
            return common_prefix(prefix, best_path_);
        }
        if (cert > best_cert_) {
            best_cert_ = std::move(cert);
            best_lab_ = p.lab;
            best_path_ = prefix;
        }
        return level;
    }

    int find(std::vector<int>& uf, int x) const {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    }

    std::vector<int> orbits_fixing(const std::vector<int>& prefix) const {
        std::vector<int> uf(n_);
        std::iota(uf.begin(), uf.end(), 0);
        for (const auto& gamma : gens_) {
            bool fixes = std::all_of(prefix.begin(), prefix.end(), [&](int v) { return gamma[v] == v; });
            if (!fixes) continue;
            for (int v = 0; v < n_; ++v) {
                int a = find(uf, v), b = find(uf, gamma[v]);
                if (a != b) uf[std::max(a, b)] = std::min(a, b);
            }
        }
        for (int v = 0; v < n_; ++v) uf[v] = find(uf, v);
        return uf;
    }

    int search(const Partition& p, std::vector<int>& prefix) {
        int level = static_cast<int>(prefix.size());
        if (p.discrete()) return leaf(p, prefix);

        int target = -1, best_size = std::numeric_limits<int>::max();
        for (int s = 0; s < n_; s = p.cell_end[s]) {
            int size = p.cell_end[s] - s;
            if (size > 1 && size < best_size) {
                best_size = size;
                target = s;
            }
        }
        std::vector<int> cell(p.lab.begin() + target, p.lab.begin() + p.cell_end[target]);
        std::vector<int> tried;
        std::size_t gens_seen = static_cast<std::size_t>(-1);
        std::vector<int> orbit;
        for (int v : cell) {
            if (!tried.empty()) {
                if (gens_seen != gens_.size()) {
                    orbit = orbits_fixing(prefix);
                    gens_seen = gens_.size();
                }
                bool dup = std::any_of(tried.begin(), tried.end(), [&](int u) { return orbit[u] == orbit[v]; });
                if (dup) continue;
            }
            tried.push_back(v);

            Partition child = p;
            int end = child.cell_end[target];
            auto it = std::find(child.lab.begin() + target, child.lab.begin() + end, v);
            std::rotate(child.lab.begin() + target, it, it + 1);
            child.cell_end[target] = target + 1;
            child.cell_end[target + 1] = end;
            for (int t = target + 1; t < end; ++t) child.cell_of[child.lab[t]] = target + 1;
            refine(child, {target});

            prefix.push_back(v);
            int resume = search(child, prefix);
            prefix.pop_back();
            if (resume < level) return resume;
        }
        return level;
    }

    const ColouredGraph& g_;
    int n_;
    std::uint64_t leaves_ = 0;
    std::vector<std::vector<int>> gens_;
    std::vector<int> first_lab_, best_lab_, first_path_, best_path_;
    std::vector<std::int64_t> first_cert_, best_cert_;
};

std::int64_t small_entry(const BigInt& v) {
    if (!v.fits_slong_p()) throw std::invalid_argument("matrix entry too large for canonical labelling");
    return v.get_si();
}

// Reads a signed order off a labelling: items in order of first appearance
// of either of their two vertices, signed by which vertex came first.
SignedPermutation read_signed_order(const std::vector<int>& lab, int offset, int count) {
    SignedPermutation sp;
    std::vector<char> seen(count, 0);
    for (int v : lab) {
        int idx = v - offset;
        if (idx < 0 || idx >= 2 * count) continue;
        int item = idx / 2;
        if (seen[item]) continue;
        seen[item] = 1;
        sp.perm.push_back(item);
        sp.sign.push_back(idx % 2 == 0 ? 1 : -1);
    }
    return sp;
}

std::vector<std::vector<std::int64_t>> sorted_abs_rows(const IntMatrix& m, bool columns) {
    int n = m.order();
    std::vector<std::vector<std::int64_t>> rows(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const BigInt& e = columns ? m(j, i) : m(i, j);
            rows[i].push_back(std::abs(small_entry(e)));
        }
        std::sort(rows[i].begin(), rows[i].end());
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

template <class T, class Canon>
ClassPartition classify(std::span<const T> items, Canon canon) {
    std::vector<T> forms(items.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, items.size() / 8)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < items.size();) forms[i] = canon(items[i]);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    ClassPartition out;
    out.class_of.resize(items.size());
    std::map<T, std::size_t> index;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto [it, fresh] = index.emplace(forms[i], out.representatives.size());
        if (fresh) out.representatives.push_back(i);
        out.class_of[i] = it->second;
    }
    return out;
}

}  // namespace

CanonicalLabelling canonical_labelling(const ColouredGraph& g) { return Labeller(g).run(); }

SignedPermutation SignedPermutation::identity(int n) {
    SignedPermutation sp;
    sp.perm.resize(n);
    std::iota(sp.perm.begin(), sp.perm.end(), 0);
    sp.sign.assign(n, 1);
    return sp;
}

IntMatrix SignedPermutation::apply(const IntMatrix& m) const {
    int n = m.order();
    IntMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = sign[i] * sign[j] * m(perm[i], perm[j]);
    return out;
}

SignMatrix apply_signed(const SignMatrix& r, const SignedPermutation& rows, const SignedPermutation& cols) {
    int n = r.order();
    SignMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.set(i, j, rows.sign[i] * cols.sign[j] * r(rows.perm[i], cols.perm[j]));
    return out;
}

Fingerprint gram_fingerprint(const IntMatrix& g) {
    return {char_poly(g), sorted_abs_rows(g, false), {}};
}

Fingerprint hadamard_fingerprint(const SignMatrix& r) {
    IntMatrix g = gram(r);
    return {char_poly(g), sorted_abs_rows(g, false), sorted_abs_rows(dual_gram(r), false)};
}

GramCertificate gram_canonical(const IntMatrix& g) {
    if (!g.is_symmetric()) throw std::invalid_argument("gram_canonical: matrix is not symmetric");
    int n = g.order();
    constexpr std::int64_t pair_colour = std::numeric_limits<std::int64_t>::min();
    ColouredGraph cg(2 * n);
    for (int i = 0; i < n; ++i) {
        std::int64_t d = small_entry(g(i, i));
        cg.set(2 * i, 2 * i, d);
        cg.set(2 * i + 1, 2 * i + 1, d);
        cg.set(2 * i, 2 * i + 1, pair_colour);
        for (int j = i + 1; j < n; ++j) {
            std::int64_t e = small_entry(g(i, j));
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) cg.set(2 * i + s, 2 * j + t, (s == t) ? e : -e);
        }
    }
    auto lab = canonical_labelling(cg);
    GramCertificate out;
    out.transform = read_signed_order(lab.lab, 0, n);
    out.canonical = out.transform.apply(g);
    out.fingerprint = gram_fingerprint(g);
#ifndef NDEBUG
    assert(det_exact(out.canonical) == det_exact(g));
#endif
    return out;
}

HadamardCertificate hadamard_canonical(const SignMatrix& r) {
    int n = r.order();
    ColouredGraph cg(4 * n);
    const int col = 2 * n;
    for (int i = 0; i < n; ++i) {
        cg.set(2 * i, 2 * i + 1, 2);
        cg.set(col + 2 * i, col + 2 * i + 1, 2);
        for (int s = 0; s < 2; ++s) cg.set(col + 2 * i + s, col + 2 * i + s, 1);
        for (int j = 0; j < n; ++j)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) cg.set(2 * i + s, col + 2 * j + t, (s == t) ? r(i, j) : -r(i, j));
    }
    auto lab = canonical_labelling(cg);
    HadamardCertificate out;
    out.rows = read_signed_order(lab.lab, 0, n);
    out.cols = read_signed_order(lab.lab, col, n);
    out.canonical = apply_signed(r, out.rows, out.cols);
    out.fingerprint = hadamard_fingerprint(r);
#ifndef NDEBUG
    assert(abs(det_sign(out.canonical)) == abs(det_sign(r)));
#endif
    return out;
}

bool are_gram_equivalent(const IntMatrix& a, const IntMatrix& b) {
    if (a.order() != b.order()) throw std::invalid_argument("are_gram_equivalent: order mismatch");
    if (!(gram_fingerprint(a) == gram_fingerprint(b))) return false;
    return gram_canonical(a).canonical == gram_canonical(b).canonical;
}

bool are_hadamard_equivalent(const SignMatrix& a, const SignMatrix& b) {
    if (a.order() != b.order()) throw std::invalid_argument("are_hadamard_equivalent: order mismatch");
    if (!(hadamard_fingerprint(a) == hadamard_fingerprint(b))) return false;
    return hadamard_canonical(a).canonical == hadamard_canonical(b).canonical;
}

ClassPartition gram_classes(std::span<const IntMatrix> grams) {
    return classify<IntMatrix>(grams, [](const IntMatrix& g) { return gram_canonical(g).canonical; });
}

ClassPartition hadamard_classes(std::span<const SignMatrix> designs) {
    return classify<SignMatrix>(designs, [](const SignMatrix& r) { return hadamard_canonical(r).canonical; });
}

}  // namespace maxdet
