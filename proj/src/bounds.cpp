#include "maxdet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxdet {

EhlichParams ehlich_params(int n) {
    if (n < 3 || n % 4 != 3) throw std::invalid_argument("ehlich_params: n must be 3 mod 4");
    EhlichParams p;
    p.n = n;
    if (n == 3) p.s = 3;
    else if (n == 7) p.s = 5;
    else if (n <= 59) p.s = 6;
    else p.s = 7;
    p.r = n / p.s;
    p.v = n - p.r * p.s;
    p.u = p.s - p.v;
    return p;
}

BigInt BoundValue::floor_root() const {
    BigInt q = squared.get_num() / squared.get_den();
    BigInt root;
    mpz_sqrt(root.get_mpz_t(), q.get_mpz_t());
    return root;
}

double BoundValue::value() const { return std::sqrt(squared.get_d()); }

Rational BoundValue::scaled_squared() const {
    Rational scale(pow_big(2, 2UL * static_cast<unsigned long>(n - 1)));
    return squared / scale;
}

double BoundValue::scaled() const {
    // Exponents stay exact; only the final square root is approximate.
    return std::sqrt(scaled_squared().get_d());
}

BoundValue hadamard_bound(int n) {
    if (n < 1) throw std::invalid_argument("hadamard_bound: n >= 1");
    return {n, Rational(pow_big(n, static_cast<unsigned long>(n)))};
}

BoundValue ehlich_barba_bound(int n) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("ehlich_barba_bound: n must be odd");
    BigInt v = pow_big(n - 1, static_cast<unsigned long>(n - 1)) * (2 * n - 1);  // 0^0 = 1 under mpz_pow_ui
    return {n, Rational(v)};
}

BoundValue ehlich_bound(int n) {
    const EhlichParams p = ehlich_params(n);
    const long a = n - 3 + 4L * p.r;
    const long b = n + 1 + 4L * p.r;
    Rational v = (n == 3) ? Rational(1) : Rational(pow_big(n - 3, static_cast<unsigned long>(n - p.s)));
    v *= Rational(pow_big(a, static_cast<unsigned long>(p.u)));
    v *= Rational(pow_big(b, static_cast<unsigned long>(p.v)));
    v *= Rational(1) - Rational(p.u * p.r, a) - Rational(p.v * (p.r + 1), b);
    v.canonicalize();
    return {n, v};
}

double bound_ratio(const BigInt& achieved, const BoundValue& bound) {
    Rational q = Rational(achieved * achieved) / bound.squared;
    return std::sqrt(q.get_d());
}

namespace {

BigInt quad(const IntMatrix& a, std::span<const long> x, int size) {
    BigInt acc = 0;
    for (int i = 0; i < size; ++i) {
        if (x[i] == 0) continue;
        BigInt row = 0;
        for (int j = 0; j < size; ++j) row += a(i, j) * x[j];
        acc += row * x[i];
    }
    return acc;
}

IntMatrix leading(const IntMatrix& m, int s) {
    IntMatrix out(s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) out(i, j) = m(i, j);
    return out;
}

struct MinimizeQuad {
    int r;
    std::vector<IntMatrix> adj;  // adj of leading minors, index s = order
    std::vector<BigInt> det;
    std::span<const long> phi;
    BigInt cap;  // only vectors with Q <= cap qualify
    std::vector<long> cur;
    std::optional<BigInt> best;
    std::vector<long> best_gamma;

    void run(int s) {
        if (s == r) {
            BigInt q = quad(adj[r], cur, r);
            if (q <= cap && (!best || q < *best)) {
                best = q;
                best_gamma = cur;
            }
            return;
        }
        // Candidate values ordered by the relaxed bound of the extended prefix.
        std::vector<std::pair<BigInt, long>> order;
        for (long v : phi) {
            cur[s] = v;
            order.emplace_back(quad(adj[s + 1], cur, s + 1), v);
        }
        std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [lb, v] : order) {
            // lb / det_{s+1} is a lower bound for Q / det_r.
            BigInt scaled = lb * det[r];
            if (scaled > cap * det[s + 1]) break;
            if (best && scaled >= *best * det[s + 1]) break;
            cur[s] = v;
            run(s + 1);
        }
        cur[s] = 0;
    }
};

}  // namespace

DStar d_star(const IntMatrix& minor, int n, long c, std::span<const long> phi) {
    const int r = minor.order();
    if (phi.empty() || r == 0) throw std::invalid_argument("d_star: empty allowable set");
    MinimizeQuad mq{r, {}, {}, phi, 0, std::vector<long>(r, 0), std::nullopt, {}};
    mq.adj.resize(r + 1);
    mq.det.resize(r + 1);
    mq.det[0] = 1;
    bool pd = true;
    for (int s = 1; s <= r; ++s) {
        IntMatrix lm = leading(minor, s);
        mq.adj[s] = adjugate(lm);
        mq.det[s] = det_exact(lm);
        if (mq.det[s] <= 0) pd = false;
    }
    if (!pd) throw std::invalid_argument("d_star: minor must be positive definite");
    mq.cap = n * mq.det[r];
    mq.run(0);
    if (!mq.best) throw std::domain_error("d_star: no allowable border vector");
    return {c * mq.det[r] - *mq.best, mq.best_gamma};
}

DStar d_star(const IntMatrix& minor, long c, std::span<const std::vector<long>> gammas) {
    if (gammas.empty()) throw std::invalid_argument("d_star: empty allowable set");
    const int r = minor.order();
    IntMatrix adj = adjugate(minor);
    BigInt det = det_exact(minor);
    std::optional<DStar> best;
    for (const auto& g : gammas) {
        if (static_cast<int>(g.size()) != r) throw std::invalid_argument("d_star: border length mismatch");
        BigInt d = c * det - quad(adj, g, r);
        if (!best || d > best->d) best = DStar{d, g};
    }
    return *best;
}

BigInt km_bound(const IntMatrix& minor, int n, long c, const BigInt& d) {
    const int r = minor.order();
    if (r >= n) throw std::invalid_argument("km_bound: requires r < n");
    if (c <= 0 || c > n) throw std::invalid_argument("km_bound: requires 0 < c <= n");
    BigInt dpos = d > 0 ? d : BigInt(0);
    return pow_big(n - c, static_cast<unsigned long>(n - r - 1)) * ((n - c) * det_exact(minor) + (n - r) * dpos);
}

BigInt sharper_bound(const IntMatrix& minor, int n, const BigInt& d) {
    if (n % 4 != 3) throw std::invalid_argument("sharper_bound: n must be 3 mod 4");
    const int r = minor.order();
    if (r >= n) throw std::invalid_argument("sharper_bound: requires r < n");
    const auto m = static_cast<unsigned long>(n - r);
    BigInt dpos = d > 0 ? d : BigInt(0);
    BigInt a = pow_big(n - 1, m);
    BigInt coeff = a - pow_big(n - 3, m) - (n - r) * pow_big(n - 3, m - 1);
    return a * det_exact(minor) + coeff * dpos;
}

std::vector<std::vector<int>> integer_partitions(int m) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rest, int maxpart) -> void {
        if (rest == 0) {
            out.push_back(cur);
            return;
        }
        for (int p = std::min(rest, maxpart); p >= 1; --p) {
            cur.push_back(p);
            self(self, rest - p, p);
            cur.pop_back();
        }
    };
    if (m > 0) rec(rec, m, m);
    return out;
}

namespace {

IntMatrix block_part(int n, std::span<const int> parts) {
    int m = 0;
    for (int p : parts) m += p;
    IntMatrix a(m);
    std::vector<int> block_of;
    for (int b = 0; b < static_cast<int>(parts.size()); ++b)
        for (int k = 0; k < parts[b]; ++k) block_of.push_back(b);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = (i == j) ? n : (block_of[i] == block_of[j] ? 3 : -1);
    return a;
}

BigInt j_adj_j(const IntMatrix& m) {
    IntMatrix adj = adjugate(m);
    BigInt s = 0;
    for (int i = 0; i < m.order(); ++i)
        for (int j = 0; j < m.order(); ++j) s += adj(i, j);
    return s;
}

}  // namespace

PartitionTable::PartitionTable(int n, int m) : n_(n), m_(m) {
    for (auto& parts : integer_partitions(m)) {
        IntMatrix a = block_part(n, parts);
        entries_.push_back({parts, det_exact(a), j_adj_j(a)});
    }
}

BigInt PartitionTable::evaluate(const BigInt& det_minor, const BigInt& j_adj_minor_j, std::vector<int>* best_parts) const {
    std::optional<BigInt> best;
    for (const auto& e : entries_) {
        BigInt v = e.det_blocks * det_minor - e.j_adj_j * j_adj_minor_j;
        if (!best || v > *best) {
            best = v;
            if (best_parts) *best_parts = e.parts;
        }
    }
    if (!best) throw std::domain_error("PartitionTable: nothing to complete");
    return *best;
}

IntMatrix partition_block_matrix(const IntMatrix& minor, int n, std::span<const int> parts) {
    const int r = minor.order();
    IntMatrix a = block_part(n, parts);
    const int m = a.order();
    IntMatrix out(r + m);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) out(i, j) = minor(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out(r + i, r + j) = a(i, j);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < m; ++j) {
            out(i, r + j) = -1;
            out(r + j, i) = -1;
        }
    return out;
}

bool partition_bound_applies(const IntMatrix& minor, int n) {
    const int r = minor.order();
    if (n % 4 != 3 || r < 1 || r >= n) return false;
    for (int i = 0; i + 1 < r; ++i)
        if (minor(i, r - 1) != -1) return false;
    return det_exact(minor) > (n - 3) * det_exact(leading(minor, r - 1));
}

BigInt partition_bound(const IntMatrix& minor, int n, std::vector<int>* best_parts) {
    if (!partition_bound_applies(minor, n)) throw std::domain_error("partition_bound: preconditions not met");
    const int r = minor.order();
    PartitionTable table(n, n - r);
    return table.evaluate(det_exact(minor), j_adj_j(minor), best_parts);
}

bool is_block_matrix(const IntMatrix& a, int n) {
    const int p = a.order();
    for (int i = 0; i < p; ++i) {
        if (a(i, i) != n) return false;
        for (int j = 0; j < p; ++j)
            if (i != j && a(i, j) != -1 && a(i, j) != 3) return false;
    }
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            if (a(i, j) != 3) continue;
            for (int k = 0; k < p; ++k)
                if (k != i && k != j && a(k, i) != a(k, j)) return false;
        }
    return true;
}

}  // namespace maxdet
