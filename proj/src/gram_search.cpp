#include "maxdet/gram_search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

#include "maxdet/bounds.hpp"
#include "maxdet/io.hpp"

namespace maxdet {

BoundPolicy parse_bound_policy(const std::string& name) {
    if (name == "none") return BoundPolicy::none;
    if (name == "km") return BoundPolicy::km;
    if (name == "sharper") return BoundPolicy::sharper;
    if (name == "partition") return BoundPolicy::partition;
    if (name == "auto") return BoundPolicy::automatic;
    throw std::invalid_argument("unknown bound policy: " + name);
}

std::string to_string(BoundPolicy policy) {
    switch (policy) {
        case BoundPolicy::none: return "none";
        case BoundPolicy::km: return "km";
        case BoundPolicy::sharper: return "sharper";
        case BoundPolicy::partition: return "partition";
        case BoundPolicy::automatic: return "auto";
    }
    return "?";
}

AdmissibleSet admissible_values(int n) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("admissible_values: n must be odd");
    AdmissibleSet a;
    a.n = n;
    for (long k = -(n - 2); k <= n - 4; ++k)
        if ((k - n) % 4 == 0) a.phi.push_back(k);
    a.c = 1;
    return a;
}

namespace {

bool leading_minors_positive(const IntMatrix& m) {
    for (int s = 1; s <= m.order(); ++s) {
        IntMatrix lm(s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) lm(i, j) = m(i, j);
        if (det_exact(lm) <= 0) return false;
    }
    return true;
}

}  // namespace

std::optional<CandidateMinor> extend_minor(const CandidateMinor& minor, std::span<const long> f, int n) {
    const int r = minor.order();
    if (static_cast<int>(f.size()) != r) throw std::invalid_argument("extend_minor: border length must equal the minor order");
    if (!leading_minors_positive(minor.m)) throw std::invalid_argument("extend_minor: minor is not positive definite");
    IntMatrix m(r + 1);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m(i, j) = minor.m(i, j);
    for (int i = 0; i < r; ++i) {
        m(i, r) = f[i];
        m(r, i) = f[i];
    }
    m(r, r) = n;
    BigInt det = det_exact(m);
    if (det <= 0) return std::nullopt;
    return CandidateMinor{std::move(m), std::move(det)};
}

bool is_candidate_minor(const IntMatrix& m, int n) {
    if (n < 1 || n % 2 == 0 || !m.is_symmetric()) return false;
    const auto phi = admissible_values(n).phi;
    for (int i = 0; i < m.order(); ++i)
        for (int j = 0; j < m.order(); ++j) {
            if (i == j) {
                if (m(i, i) != n) return false;
            } else if (!m(i, j).fits_slong_p() || !std::binary_search(phi.begin(), phi.end(), m(i, j).get_si())) {
                return false;
            }
        }
    return leading_minors_positive(m);
}

bool is_candidate_gram(const IntMatrix& m, int n, const BigInt& d_min) {
    if (m.order() != n || !is_candidate_minor(m, n)) return false;
    BigInt root;
    return is_square(det_exact(m), &root) && root >= d_min;
}

namespace {

constexpr int kMaxOrder = 64;

// Comparison key for off-diagonal entries.  Candidates of odd order n are
// dominated by the entry closest to zero in the admissible set (1 or -1);
// ranking by distance from it lets rare entries decide comparisons early.
int entry_rank(int v, int n) {
    static const bool numeric = [] {
        const char* e = std::getenv("MAXDET_ORDER");
        return e && std::string(e) == "numeric";
    }();
    if (numeric || n % 2 == 0) return v;
    const int center = (n % 4 == 1) ? 1 : -1;
    const int dist = v > center ? v - center : center - v;
    return 2 * dist + (v < center ? 1 : 0);
}

// Canonicity of a symmetric integer matrix under simultaneous permutation,
// comparing the strict lower triangle row by row.  `twin` maps each vertex to
// the smallest vertex with the same off-pair row; swapping twins fixes M.
class CanonTester {
public:
    bool is_canonical(const int* a, int stride, int t, const int* twin) {
        a_ = a;
        stride_ = stride;
        t_ = t;
        twin_ = twin;
        used_ = 0;
        return descend(0);
    }

private:
    bool descend(int d) {
        if (d == t_) return true;
        std::uint64_t tried = 0;
        for (int v = 0; v < t_; ++v) {
            if ((used_ >> v) & 1U) continue;
            const std::uint64_t rep = std::uint64_t{1} << twin_[v];
            if (tried & rep) continue;
            tried |= rep;
            int cmp = 0;
            const int* row = a_ + static_cast<std::ptrdiff_t>(v) * stride_;
            const int* ref = a_ + static_cast<std::ptrdiff_t>(d) * stride_;
            for (int i = 0; i < d; ++i) {
                const int x = row[perm_[i]];
                if (x != ref[i]) {
                    cmp = x > ref[i] ? 1 : -1;
                    break;
                }
            }
            if (cmp > 0) return false;
            if (cmp < 0) continue;
            perm_[d] = v;
            used_ |= std::uint64_t{1} << v;
            const bool ok = descend(d + 1);
            used_ &= ~(std::uint64_t{1} << v);
            if (!ok) return false;
        }
        return true;
    }

    const int* a_ = nullptr;
    int stride_ = 0;
    int t_ = 0;
    const int* twin_ = nullptr;
    std::uint64_t used_ = 0;
    int perm_[kMaxOrder] = {};
};

void twin_classes(const int* a, int stride, int t, int* twin) {
    for (int v = 0; v < t; ++v) {
        twin[v] = v;
        for (int u = 0; u < v; ++u) {
            if (twin[u] != u) continue;
            bool same = true;
            for (int w = 0; w < t && same; ++w)
                if (w != u && w != v && a[u * stride + w] != a[v * stride + w]) same = false;
            if (same) {
                twin[v] = u;
                break;
            }
        }
    }
}

std::vector<int> small_entries(const IntMatrix& m) {
    const int t = m.order();
    int n = 0;
    if (t > 0 && m(0, 0).fits_sint_p()) n = static_cast<int>(m(0, 0).get_si());
    for (int i = 0; i < t; ++i)
        if (m(i, i) != n) n = 0;
    if (t > kMaxOrder) throw std::invalid_argument("matrix order exceeds search limit");
    std::vector<int> a(static_cast<std::size_t>(t) * t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) {
            if (!m(i, j).fits_sint_p()) throw std::invalid_argument("matrix entries must be small integers");
            a[static_cast<std::size_t>(i) * t + j] = entry_rank(static_cast<int>(m(i, j).get_si()), n);
        }
    return a;
}

// Lex-max orbit member: at each depth only the vertices with the largest key
// can continue a maximal sequence; ties are explored, compared at the leaves.
class CanonForm {
public:
    std::vector<int> run(const int* a, int t) {
        a_ = a;
        t_ = t;
        twin_.assign(t, 0);
        twin_classes(a, t, t, twin_.data());
        perm_.assign(t, -1);
        cur_.assign(t, {});
        best_.clear();
        best_perm_.clear();
        used_.assign(t, false);
        descend(0, false);
        return best_perm_;
    }

private:
    void descend(int d, bool greater) {
        if (d == t_) {
            if (best_perm_.empty() || greater) {
                best_ = cur_;
                best_perm_ = perm_;
                ++generation_;
            }
            return;
        }
        std::vector<int> tried;
        std::vector<int> max_key;
        std::vector<int> choices;
        for (int v = 0; v < t_; ++v) {
            if (used_[v] || std::find(tried.begin(), tried.end(), twin_[v]) != tried.end()) continue;
            tried.push_back(twin_[v]);
            std::vector<int> key(d);
            for (int i = 0; i < d; ++i) key[i] = a_[v * t_ + perm_[i]];
            if (choices.empty() || key > max_key) {
                max_key = key;
                choices = {v};
            } else if (key == max_key) {
                choices.push_back(v);
            }
        }
        for (int v : choices) {
            bool g = greater;
            if (!best_perm_.empty() && !g) {
                if (max_key < best_[d]) return;
                g = max_key > best_[d];
            }
            cur_[d] = max_key;
            perm_[d] = v;
            used_[v] = true;
            const auto gen = generation_;
            descend(d + 1, g);
            used_[v] = false;
            if (generation_ != gen) greater = false;
        }
    }

    const int* a_ = nullptr;
    int t_ = 0;
    std::vector<int> twin_;
    std::vector<int> perm_;
    std::vector<bool> used_;
    std::vector<std::vector<int>> cur_;
    std::vector<std::vector<int>> best_;
    std::vector<int> best_perm_;
    std::uint64_t generation_ = 0;
};

}  // namespace

bool is_lex_canonical(const IntMatrix& m) {
    if (!m.is_symmetric()) throw std::invalid_argument("is_lex_canonical: matrix must be symmetric");
    const int t = m.order();
    if (t <= 1) return true;
    auto a = small_entries(m);
    std::vector<int> twin(t);
    twin_classes(a.data(), t, t, twin.data());
    CanonTester tester;
    return tester.is_canonical(a.data(), t, t, twin.data());
}

IntMatrix lex_canonical_form(const IntMatrix& m) {
    if (!m.is_symmetric()) throw std::invalid_argument("lex_canonical_form: matrix must be symmetric");
    const int t = m.order();
    if (t <= 1) return m;
    auto a = small_entries(m);
    CanonForm form;
    auto perm = form.run(a.data(), t);
    return m.permuted(perm);
}

namespace {

using Int256 = boost::multiprecision::checked_int256_t;

template <class Int>
Int from_big(const BigInt& v);
template <>
int128 from_big<int128>(const BigInt& v) { return to_int128(v); }
template <>
Int256 from_big<Int256>(const BigInt& v) { return Int256(v.get_str()); }
template <>
BigInt from_big<BigInt>(const BigInt& v) { return v; }

BigInt big_of(int128 v) { return to_big(v); }
BigInt big_of(const Int256& v) { return BigInt(v.str()); }
BigInt big_of(const BigInt& v) { return v; }

BigInt ceil_div(const BigInt& a, const BigInt& b) {
    BigInt q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

struct Unit {
    int order = 0;
    std::vector<int> entries;  // order x order, row-major
};

struct LocalStats {
    std::uint64_t nodes = 0;
    std::vector<std::uint64_t> per_level;
    std::uint64_t partition_fallbacks = 0;
};

template <class Int>
class Engine {
public:
    Engine(int n, BoundPolicy policy, const BigInt& d2) : n_(n), policy_(policy) {
        if (n > kMaxOrder) throw std::invalid_argument("gram search supports n <= 64");
        if (policy_ == BoundPolicy::automatic) policy_ = (n % 4 == 3) ? BoundPolicy::partition : BoundPolicy::km;
        if ((policy_ == BoundPolicy::sharper || policy_ == BoundPolicy::partition) && n % 4 != 3)
            throw std::invalid_argument("bound policy " + to_string(policy_) + " needs n = 3 (mod 4)");
        auto adm = admissible_values(n);
        vals_.assign(adm.phi.begin(), adm.phi.end());
        std::sort(vals_.begin(), vals_.end(), [n](int a, int b) { return entry_rank(a, n) > entry_rank(b, n); });
        for (int v : vals_) rank_[v + kMaxOrder] = entry_rank(v, n);
        d2_ = from_big<Int>(d2);
        det_.assign(n + 1, Int(0));
        det_[0] = 1;
        adj_.resize(n + 1);
        for (int s = 0; s <= n; ++s) adj_[s].assign(static_cast<std::size_t>(s) * s, Int(0));
        twin_.assign(static_cast<std::size_t>(n + 1) * kMaxOrder, 0);
        floor_.assign(n + 1, Int(1));
        const BigInt nm1 = n - 1;
        if (policy_ != BoundPolicy::none) {
            // Completion bounds never exceed (n-1)^(n-s-1) (2n-1-s) det(M_s).
            for (int s = 1; s < n; ++s) {
                BigInt denom = pow_big(nm1, static_cast<unsigned long>(n - s - 1)) * (2 * n - 1 - s);
                BigInt fl = ceil_div(d2, denom);
                floor_[s] = from_big<Int>(fl > 1 ? fl : BigInt(1));
            }
        }
        floor_[n] = from_big<Int>(d2 > 1 ? d2 : BigInt(1));
        base_mult_.assign(n + 1, Int(0));
        coeff_.assign(n + 1, Int(0));
        tables_.resize(n + 1);
        for (int t = 1; t < n; ++t) {
            const auto m = static_cast<unsigned long>(n - t);
            if (policy_ == BoundPolicy::km) {
                base_mult_[t] = from_big<Int>(pow_big(nm1, m));
                coeff_[t] = from_big<Int>(pow_big(nm1, m - 1) * (n - t));
            } else if (policy_ != BoundPolicy::none) {
                BigInt a = pow_big(nm1, m);
                base_mult_[t] = from_big<Int>(a);
                coeff_[t] = from_big<Int>(a - pow_big(n - 3, m) - (n - t) * pow_big(n - 3, m - 1));
            }
            if (policy_ == BoundPolicy::partition) {
                PartitionTable table(n, n - t);
                for (const auto& e : table.entries())
                    tables_[t].push_back({from_big<Int>(e.det_blocks), from_big<Int>(e.j_adj_j)});
            }
        }
        stats_.per_level.assign(n + 1, 0);
    }

    const LocalStats& stats() const { return stats_; }

    void set_root() {
        at(0, 0) = n_;
        det_[1] = n_;
        adj_[1][0] = 1;
        twin_[kMaxOrder] = 0;
    }

    // Rebuilds the path state for a frontier node.
    void load(const Unit& u) {
        set_root();
        for (int r = 1; r < u.order; ++r) {
            int* f = fbuf_[r];
            for (int i = 0; i < r; ++i) f[i] = u.entries[static_cast<std::size_t>(r) * u.order + i];
            Int p = quad(r, f);
            place_child(r, f, Int(n_) * det_[r] - p);
            update_adj(r + 1, f);
            update_twins(r + 1, f);
        }
    }

    bool root_ok() {
        if (n_ == 1) return det_[1] >= floor_[1];
        return det_[1] >= floor_[1] && bound_ok(1);
    }

    // Explores below the loaded node of order t; nodes of order stop_order are
    // handed to `frontier` instead of being expanded.
    void explore(int t, int stop_order, std::vector<Unit>* frontier, std::vector<CandidateMinor>* out) {
        stop_order_ = stop_order;
        frontier_ = frontier;
        out_ = out;
        visit(t);
    }

private:
    int& at(int i, int j) { return mat_[i * kMaxOrder + j]; }
    int at(int i, int j) const { return mat_[i * kMaxOrder + j]; }
    Int& adj(int s, int i, int j) { return adj_[s][static_cast<std::size_t>(i) * s + j]; }

    void visit(int t) {
        if (t == n_) {
            emit();
            return;
        }
        if (t == stop_order_ && frontier_) {
            Unit u;
            u.order = t;
            u.entries.resize(static_cast<std::size_t>(t) * t);
            for (int i = 0; i < t; ++i)
                for (int j = 0; j < t; ++j) u.entries[static_cast<std::size_t>(i) * t + j] = at(i, j);
            frontier_->push_back(std::move(u));
            return;
        }
        const Int limit = Int(n_) * det_[t] - floor_[t + 1];
        if (limit < 0) return;
        children(0, t, limit, Int(0), t > 1);
    }

    // w_s = sum_i y_i f_i with y = adj(M_s) M[0..s-1][s], read off adj(M_{s+1}).
    Int cross(int s, const int* f) {
        Int w = 0;
        for (int i = 0; i < s; ++i)
            if (f[i] != 0) w -= adj(s + 1, i, s) * f[i];
        return w;
    }

    // f^T adj(M_r) f.
    Int quad(int r, const int* f) {
        Int p = 0;
        for (int s = 0; s < r; ++s) p = step(s, f, p, f[s]);
        return p;
    }

    // P_{s+1} from P_s for prefix value v at position s.
    Int step(int s, const int* f, const Int& p, int v) {
        Int w = cross(s, f);
        Int base = (det_[s + 1] * p + w * w) / det_[s];
        return base - Int(2 * v) * w + Int(v) * Int(v) * det_[s];
    }

    void children(int s, int r, const Int& limit, const Int& p, bool tight) {
        int* f = fbuf_[r];
        if (s == r) {
            accept(r, f, Int(n_) * det_[r] - p);
            return;
        }
        Int w = cross(s, f);
        Int base = (det_[s + 1] * p + w * w) / det_[s];
        const bool bounded = tight && s < r - 1;
        const int cap = bounded ? at(r - 1, s) : 0;
        const int cap_rank = bounded ? rk_[(r - 1) * kMaxOrder + s] : 0;
        for (int v : vals_) {
            if (bounded && rank_[v + kMaxOrder] > cap_rank) continue;
            Int pn = base - Int(2 * v) * w + Int(v) * Int(v) * det_[s];
            if (pn * det_[r] > limit * det_[s + 1]) continue;
            f[s] = v;
            children(s + 1, r, limit, pn, bounded && v == cap);
        }
    }

    void place_child(int r, const int* f, const Int& det) {
        for (int i = 0; i < r; ++i) {
            at(r, i) = f[i];
            at(i, r) = f[i];
            rk_[r * kMaxOrder + i] = rank_[f[i] + kMaxOrder];
            rk_[i * kMaxOrder + r] = rank_[f[i] + kMaxOrder];
        }
        at(r, r) = n_;
        det_[r + 1] = det;
    }

    void update_adj(int t, const int* f) {
        const int r = t - 1;
        Int y[kMaxOrder];
        for (int i = 0; i < r; ++i) {
            Int acc = 0;
            for (int j = 0; j < r; ++j)
                if (f[j] != 0) acc += adj(r, i, j) * f[j];
            y[i] = acc;
        }
        for (int i = 0; i < r; ++i) {
            for (int j = i; j < r; ++j) {
                Int v = (det_[t] * adj(r, i, j) + y[i] * y[j]) / det_[r];
                adj(t, i, j) = v;
                adj(t, j, i) = v;
            }
            adj(t, i, r) = -y[i];
            adj(t, r, i) = -y[i];
        }
        adj(t, r, r) = det_[r];
    }

    void update_twins(int t, const int* f) {
        const int r = t - 1;
        const int* prev = &twin_[static_cast<std::size_t>(r) * kMaxOrder];
        int* cur = &twin_[static_cast<std::size_t>(t) * kMaxOrder];
        for (int v = 0; v < r; ++v) {
            cur[v] = v;
            // Twins in M_t are twins in M_r with equal entries in the new column.
            for (int u = prev[v]; u < v; ++u) {
                if (cur[u] == u && prev[u] == prev[v] && f[u] == f[v]) {
                    cur[v] = u;
                    break;
                }
            }
        }
        cur[r] = r;
        for (int u = 0; u < r; ++u) {
            if (cur[u] != u) continue;
            bool same = true;
            for (int w = 0; w < r && same; ++w)
                if (w != u && at(u, w) != f[w]) same = false;
            if (same) {
                cur[r] = u;
                break;
            }
        }
    }

    void accept(int r, const int* f, const Int& det) {
        const int t = r + 1;
        place_child(r, f, det);
        if (t == n_) {
            BigInt d = big_of(det);
            if (!is_square(d)) return;
            update_twins(t, f);
            if (!tester_.is_canonical(rk_, kMaxOrder, t, &twin_[static_cast<std::size_t>(t) * kMaxOrder])) return;
            ++stats_.nodes;
            ++stats_.per_level[t];
            visit(t);
            return;
        }
        update_twins(t, f);
        if (!tester_.is_canonical(rk_, kMaxOrder, t, &twin_[static_cast<std::size_t>(t) * kMaxOrder])) return;
        update_adj(t, f);
        if (!bound_ok(t)) return;
        ++stats_.nodes;
        ++stats_.per_level[t];
        visit(t);
    }

    bool bound_ok(int t) {
        switch (policy_) {
            case BoundPolicy::none: return true;
            case BoundPolicy::km:
            case BoundPolicy::sharper: return completion_ok(t);
            case BoundPolicy::partition:
                if (partition_applies(t)) {
                    if (partition_value(t - 1) < d2_) return false;
                } else {
                    ++stats_.partition_fallbacks;
                }
                return completion_ok(t);
            case BoundPolicy::automatic: break;
        }
        return true;
    }

    // base + coeff * max(0, det_t - min gamma^T adj gamma) >= D^2 for some gamma.
    bool completion_ok(int t) {
        Int base = base_mult_[t] * det_[t];
        if (base >= d2_) return true;
        Int gap = d2_ - base;
        Int need = gap / coeff_[t];
        if (need * coeff_[t] < gap) need += 1;
        Int theta = det_[t] - need;
        if (theta < 0) return false;
        return gamma_exists(0, t, theta, Int(0));
    }

    bool gamma_exists(int s, int t, const Int& theta, const Int& p) {
        if (s == t) return true;
        int* g = gbuf_;
        Int w = cross(s, g);
        Int base = (det_[s + 1] * p + w * w) / det_[s];
        std::pair<Int, int> order[kMaxOrder];
        int count = 0;
        for (int v : vals_) order[count++] = {Int(base - Int(2 * v) * w + Int(v) * Int(v) * det_[s]), v};
        std::sort(order, order + count, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (int k = 0; k < count; ++k) {
            if (order[k].first * det_[t] > theta * det_[s + 1]) break;
            g[s] = order[k].second;
            if (gamma_exists(s + 1, t, theta, order[k].first)) return true;
        }
        return false;
    }

    // When the new row of M_t is all -1, canonicity forces every later row to
    // start with t-1 entries -1 (the lowest rank), so each completion of M_t
    // is a completion of M_(t-1) with all -1 borders.  The all -1 partition
    // bound is applied to M_(t-1); applying it to M_t would also assume the
    // entries below position t-1 equal -1, which need not hold.
    bool partition_applies(int t) {
        if (t < 2 || entry_rank(-1, n_) != 0) return false;
        for (int i = 0; i + 1 < t; ++i)
            if (at(i, t - 1) != -1) return false;
        return det_[t - 1] > Int(n_ - 3) * det_[t - 2];
    }

    Int partition_value(int t) {
        Int jaj = 0;
        for (const auto& v : adj_[t]) jaj += v;
        bool first = true;
        Int best = 0;
        for (const auto& [db, ja] : tables_[t]) {
            Int v = db * det_[t] - ja * jaj;
            if (first || v > best) best = v;
            first = false;
        }
        return best;
    }

    void emit() {
        if (!out_) return;
        IntMatrix m(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m(i, j) = at(i, j);
        out_->push_back({std::move(m), big_of(det_[n_])});
    }

    int n_;
    BoundPolicy policy_;
    std::vector<int> vals_;  // descending
    Int d2_;
    std::vector<Int> det_;
    std::vector<std::vector<Int>> adj_;
    std::vector<Int> floor_;
    std::vector<Int> base_mult_;
    std::vector<Int> coeff_;
    std::vector<std::vector<std::pair<Int, Int>>> tables_;
    std::vector<int> twin_;
    int mat_[kMaxOrder * kMaxOrder] = {};
    int rk_[kMaxOrder * kMaxOrder] = {};
    int rank_[2 * kMaxOrder + 1] = {};  // by value + kMaxOrder
    int fbuf_[kMaxOrder][kMaxOrder] = {};
    int gbuf_[kMaxOrder] = {};
    CanonTester tester_;
    LocalStats stats_;
    int stop_order_ = 0;
    std::vector<Unit>* frontier_ = nullptr;
    std::vector<CandidateMinor>* out_ = nullptr;
};

double log2_of(int n) { return std::log2(static_cast<double>(n)); }

// Largest intermediate values are about n^(2n+3).
int magnitude_bits(int n) { return static_cast<int>((2.0 * n + 3.0) * log2_of(n)) + 4; }

template <class F>
auto with_engine_type(int n, F&& fn) {
    const int bits = magnitude_bits(n);
    if (bits <= 126) return fn(static_cast<int128*>(nullptr));
    if (bits <= 254) return fn(static_cast<Int256*>(nullptr));
    return fn(static_cast<BigInt*>(nullptr));
}

BigInt target_square(const SearchConfig& config) { return config.d_min * config.d_min; }

void validate(const SearchConfig& config) {
    if (config.n < 1 || config.n % 2 == 0) throw std::invalid_argument("gram search needs odd n");
    if (config.n > kMaxOrder) throw std::invalid_argument("gram search supports n <= 64");
    if (config.d_min < 0) throw std::invalid_argument("d_min must be non-negative");
    if (config.subtree_count < 1 || config.subtree_index < 0 || config.subtree_index >= config.subtree_count)
        throw std::invalid_argument("subtree index must satisfy 0 <= i < k");
}

bool beyond_hadamard(const SearchConfig& config) { return target_square(config) > pow_big(config.n, static_cast<unsigned long>(config.n)); }

template <class Int>
std::vector<Unit> frontier_units(const SearchConfig& config, int depth, LocalStats* stats) {
    Engine<Int> e(config.n, config.bound, target_square(config));
    e.set_root();
    std::vector<Unit> units;
    if (e.root_ok()) e.explore(1, depth, &units, nullptr);
    if (stats) *stats = e.stats();
    return units;
}

struct Checkpoint {
    std::string path;
    std::string header;
    std::vector<std::pair<std::size_t, std::vector<CandidateMinor>>> done;
};

std::string checkpoint_header(const SearchConfig& config, int depth, std::size_t units) {
    std::ostringstream ss;
    ss << "maxdet-checkpoint v1 n=" << config.n << " dmin2=" << target_square(config).get_str() << " bound=" << to_string(config.bound)
       << " depth=" << depth << " units=" << units;
    return ss.str();
}

void write_unit(std::ostream& out, std::size_t unit, const std::vector<CandidateMinor>& cands) {
    out << "unit " << unit << ' ' << cands.size() << '\n';
    for (const auto& c : cands) write_candidate_block(out, c);
    out << "end " << unit << '\n';
}

// Loads complete units and rewrites the file without any torn tail.
Checkpoint open_checkpoint(const SearchConfig& config, int depth, std::size_t units) {
    Checkpoint cp;
    cp.path = config.checkpoint_path;
    cp.header = checkpoint_header(config, depth, units);
    if (std::filesystem::exists(cp.path)) {
        std::ifstream in(cp.path);
        std::string line;
        long line_no = 0;
        if (!std::getline(in, line)) line.clear();
        ++line_no;
        if (!line.empty() && line != cp.header)
            throw std::runtime_error("checkpoint " + cp.path + " belongs to a different search: " + line);
        try {
            while (std::getline(in, line)) {
                ++line_no;
                if (line.empty()) continue;
                std::istringstream ss(line);
                std::string word;
                std::size_t idx = 0;
                std::size_t count = 0;
                if (!(ss >> word >> idx >> count) || word != "unit") break;
                std::vector<CandidateMinor> cands(count);
                bool complete = true;
                for (auto& c : cands)
                    if (!read_candidate_block(in, config.n, c, line_no)) {
                        complete = false;
                        break;
                    }
                if (!complete || !std::getline(in, line) || line != "end " + std::to_string(idx)) break;
                ++line_no;
                if (idx >= units) throw std::runtime_error("checkpoint unit index out of range");
                cp.done.emplace_back(idx, std::move(cands));
            }
        } catch (const FormatError&) {
            // torn final unit; keep what was complete
        }
    }
    std::string tmp = cp.path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
        out << cp.header << '\n';
        for (const auto& [idx, cands] : cp.done) write_unit(out, idx, cands);
    }
    std::filesystem::rename(tmp, cp.path);
    return cp;
}

int worker_count(const SearchConfig& config, std::size_t jobs) {
    int w = config.workers;
    if (w <= 0) {
        if (const char* env = std::getenv("MAXDET_WORKERS")) w = std::atoi(env);
    }
    if (w <= 0) w = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(w), jobs)));
}

template <class Int>
SearchResult run_search(const SearchConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    SearchResult result;
    result.stats.nodes_per_level.assign(config.n + 1, 0);
    const int depth = effective_split_depth(config);
    LocalStats fstats;
    auto units = frontier_units<Int>(config, depth, &fstats);
    result.stats.frontier_units = units.size();
    for (int s = 0; s <= std::min(depth, config.n); ++s) result.stats.nodes_per_level[s] += fstats.per_level[s];
    result.stats.partition_fallbacks += fstats.partition_fallbacks;
    if (!units.empty() || config.n == 1) ++result.stats.nodes_per_level[1];

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < units.size(); ++i)
        if (static_cast<int>(i % static_cast<std::size_t>(config.subtree_count)) == config.subtree_index) todo.push_back(i);

    std::vector<CandidateMinor> all;
    std::mutex mu;
    std::optional<Checkpoint> cp;
    std::ofstream cp_out;
    if (!config.checkpoint_path.empty()) {
        cp = open_checkpoint(config, depth, units.size());
        std::vector<bool> finished(units.size(), false);
        for (auto& [idx, cands] : cp->done) {
            finished[idx] = true;
            all.insert(all.end(), cands.begin(), cands.end());
            ++result.stats.units_resumed;
        }
        std::erase_if(todo, [&](std::size_t i) { return finished[i]; });
        cp_out.open(cp->path, std::ios::app);
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        Engine<Int> e(config.n, config.bound, target_square(config));
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) break;
            const std::size_t idx = todo[k];
            std::vector<CandidateMinor> found;
            e.load(units[idx]);
            e.explore(units[idx].order, -1, nullptr, &found);
            std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.m < b.m; });
            std::lock_guard lock(mu);
            if (cp_out.is_open()) {
                write_unit(cp_out, idx, found);
                cp_out.flush();
            }
            all.insert(all.end(), found.begin(), found.end());
            ++result.stats.units_processed;
        }
        std::lock_guard lock(mu);
        const auto& ls = e.stats();
        for (int s = 0; s <= config.n; ++s) result.stats.nodes_per_level[s] += ls.per_level[s];
        result.stats.partition_fallbacks += ls.partition_fallbacks;
    };
    const int nw = worker_count(config, todo.size());
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    result.candidates = merge_candidates(std::move(all));
    for (auto v : result.stats.nodes_per_level) result.stats.nodes += v;
    result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace

int effective_split_depth(const SearchConfig& config) {
    const int n = config.n;
    if (n <= 2) return 1;
    if (config.split_depth > 0) return std::min(config.split_depth, n - 1);
    return std::max(1, std::min(n - 1, (n + 2) / 3));
}

std::vector<CandidateMinor> merge_candidates(std::vector<CandidateMinor> all) {
    std::sort(all.begin(), all.end(), [](const CandidateMinor& a, const CandidateMinor& b) {
        if (a.det != b.det) return a.det > b.det;
        return a.m < b.m;
    });
    all.erase(std::unique(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.det == b.det && a.m == b.m; }), all.end());
    return all;
}

SearchResult search_grams(const SearchConfig& config) {
    validate(config);
    if (config.n == 1) {
        SearchResult r;
        r.stats.nodes_per_level.assign(2, 0);
        if (config.d_min <= 1) {
            r.candidates.push_back({IntMatrix{{1}}, 1});
            r.stats.nodes = 1;
            r.stats.nodes_per_level[1] = 1;
        }
        return r;
    }
    if (beyond_hadamard(config)) {
        SearchResult r;
        r.stats.nodes_per_level.assign(config.n + 1, 0);
        return r;
    }
    return with_engine_type(config.n, [&](auto* tag) {
        using Int = std::remove_pointer_t<decltype(tag)>;
        return run_search<Int>(config);
    });
}

std::size_t frontier_size(const SearchConfig& config, int depth) {
    validate(config);
    if (config.n == 1) return config.d_min <= 1 ? 1 : 0;
    if (beyond_hadamard(config)) return 0;
    SearchConfig c = config;
    c.split_depth = depth;
    const int d = effective_split_depth(c);
    return with_engine_type(config.n, [&](auto* tag) {
        using Int = std::remove_pointer_t<decltype(tag)>;
        return frontier_units<Int>(c, d, nullptr).size();
    });
}

std::vector<SearchConfig> split_subtrees(const SearchConfig& config, int depth, int count) {
    if (count < 1) throw std::invalid_argument("split_subtrees: count must be positive");
    const std::size_t units = frontier_size(config, depth);
    const int k = static_cast<int>(std::min<std::size_t>(units, static_cast<std::size_t>(count)));
    std::vector<SearchConfig> out;
    for (int i = 0; i < k; ++i) {
        SearchConfig c = config;
        c.split_depth = depth;
        c.subtree_index = i;
        c.subtree_count = k;
        out.push_back(c);
    }
    return out;
}

}  // namespace maxdet
