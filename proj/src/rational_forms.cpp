#include "maxdet/rational_forms.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace maxdet {

RatMatrix to_rational(const IntMatrix& m) {
    int n = m.order();
    RatMatrix out(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i][j] = Rational(m(i, j));
    return out;
}

namespace {

bool symmetric(const RatMatrix& a) {
    std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (a[i][j] != a[j][i]) return false;
    }
    return true;
}

// B = E B E^T where E adds `f` times row `from` to row `to`.
void add_congruent(RatMatrix& b, RatMatrix& u, int to, int from, const Rational& f) {
    int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) b[to][c] += f * b[from][c];
    for (int r = 0; r < n; ++r) b[r][to] += f * b[r][from];
    for (int c = 0; c < n; ++c) u[to][c] += f * u[from][c];
}

void swap_congruent(RatMatrix& b, RatMatrix& u, int i, int j) {
    std::swap(b[i], b[j]);
    for (auto& row : b) std::swap(row[i], row[j]);
    std::swap(u[i], u[j]);
}

}  // namespace

DiagonalForm diagonalize(const RatMatrix& a) {
    if (!symmetric(a)) throw std::invalid_argument("diagonalize: matrix is not symmetric");
    int n = static_cast<int>(a.size());
    RatMatrix b = a;
    RatMatrix u(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i) u[i][i] = 1;

    for (int k = 0; k < n; ++k) {
        if (b[k][k] == 0) {
            int j = k + 1;
            while (j < n && b[j][j] == 0) ++j;
            if (j < n) {
                swap_congruent(b, u, k, j);
            } else {
                j = k + 1;
                while (j < n && b[k][j] == 0) ++j;
                if (j == n) throw std::invalid_argument("diagonalize: matrix is singular");
                add_congruent(b, u, k, j, 1);  // new pivot is 2 b[k][j]
            }
        }
        const Rational pivot = b[k][k];
        for (int i = k + 1; i < n; ++i) {
            if (b[i][k] == 0) continue;
            Rational f = b[i][k] / pivot;
            for (int c = k + 1; c < n; ++c) b[i][c] -= f * b[k][c];
            for (int c = 0; c < n; ++c) u[i][c] -= f * u[k][c];
        }
        for (int i = k + 1; i < n; ++i) b[i][k] = b[k][i] = 0;
    }

    DiagonalForm out;
    out.u = std::move(u);
    for (int i = 0; i < n; ++i) out.d.push_back(b[i][i]);

    // u a u^T must reproduce the diagonal exactly.
    for (int i = 0; i < n; ++i) {
        std::vector<Rational> ua(n);
        for (int c = 0; c < n; ++c)
            for (int t = 0; t < n; ++t)
                if (out.u[i][t] != 0) ua[c] += out.u[i][t] * a[t][c];
        for (int j = 0; j < n; ++j) {
            Rational e = 0;
            for (int c = 0; c < n; ++c) e += ua[c] * out.u[j][c];
            if (e != (i == j ? out.d[i] : Rational(0))) throw std::logic_error("diagonalize: congruence check failed");
        }
    }
    return out;
}

DiagonalForm diagonalize(const IntMatrix& a) { return diagonalize(to_rational(a)); }

namespace {

BigInt rho_split(const BigInt& n, std::uint64_t& budget) {
    // Brent's variant with batched gcds.
    for (unsigned long c = 1;; ++c) {
        BigInt y = 2, x, ys, q = 1, g = 1;
        const unsigned long m = 128;
        unsigned long r = 1;
        auto step = [&](const BigInt& v) {
            BigInt t = v * v + c;
            mpz_mod(t.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
            return t;
        };
        do {
            x = y;
            for (unsigned long i = 0; i < r; ++i) y = step(y);
            unsigned long k = 0;
            do {
                ys = y;
                unsigned long lim = std::min(m, r - k);
                for (unsigned long i = 0; i < lim; ++i) {
                    y = step(y);
                    BigInt diff = abs(x - y);
                    q = (q * diff) % n;
                }
                if (budget < lim) throw FactoringBudgetExceeded("factorize: rho budget exhausted on " + n.get_str());
                budget -= lim;
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += lim;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = step(ys);
                BigInt diff = abs(x - ys);
                mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void factor_into(const BigInt& n, std::map<BigInt, int>& out, std::uint64_t& budget) {
    if (n == 1) return;
    if (mpz_probab_prime_p(n.get_mpz_t(), 40) > 0) {
        ++out[n];
        return;
    }
    BigInt d = rho_split(n, budget);
    factor_into(d, out, budget);
    factor_into(n / d, out, budget);
}

}  // namespace

Factorization factorize(const BigInt& n, std::uint64_t rho_budget) {
    if (n == 0) throw std::invalid_argument("factorize: zero");
    Factorization f;
    f.sign = n < 0 ? -1 : 1;
    BigInt m = abs(n);
    std::map<BigInt, int> found;
    for (unsigned long p = 2; p < 10000 && p * p <= m; p += (p == 2 ? 1 : 2)) {
        while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            m /= p;
            ++found[BigInt(p)];
        }
    }
    std::uint64_t budget = rho_budget;
    factor_into(m, found, budget);
    f.factors.assign(found.begin(), found.end());
    return f;
}

BigInt squarefree_part(const Rational& q, std::uint64_t rho_budget) {
    if (q == 0) throw std::invalid_argument("squarefree_part: zero");
    Factorization f = factorize(BigInt(q.get_num() * q.get_den()), rho_budget);
    BigInt s = f.sign;
    for (const auto& [p, e] : f.factors)
        if (e % 2) s *= p;
    return s;
}

namespace {

int mod8(const BigInt& v) {
    BigInt r;
    mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), 8);
    return static_cast<int>(r.get_si());
}

// Strips p from |v| and returns the exponent.
int strip(BigInt& v, const BigInt& p) {
    int e = 0;
    while (mpz_divisible_p(v.get_mpz_t(), p.get_mpz_t())) {
        v /= p;
        ++e;
    }
    return e;
}

}  // namespace

PSignature p_signature(const DiagonalForm& form, const BigInt& p) {
    int n = static_cast<int>(form.d.size());
    if (p == -1) {
        int neg = static_cast<int>(std::count_if(form.d.begin(), form.d.end(), [](const Rational& x) { return x < 0; }));
        return {p, n - 2 * neg};
    }
    if (p < 2) throw std::invalid_argument("p_signature: p must be a prime or -1");
    int total = 0;
    for (const Rational& x : form.d) {
        BigInt num = x.get_num(), den = x.get_den();
        int alpha = strip(num, p) - strip(den, p);
        bool odd = (alpha % 2) != 0;
        if (p == 2) {
            // oddity: unit parts mod 8, plus 4 for each odd power of 2 times +-3 mod 8
            int u = mod8(BigInt(num * den));
            total += u;
            if (odd && (u == 3 || u == 5)) total += 4;
        } else {
            // p-excess: (p^alpha - 1) plus 4 for each antisquare
            if (odd) {
                total += mod8(p) - 1;
                BigInt unit = num * den;
                if (mpz_kronecker(unit.get_mpz_t(), p.get_mpz_t()) == -1) total += 4;
            }
        }
    }
    return {p, ((total % 8) + 8) % 8};
}

namespace {

struct FormData {
    DiagonalForm form;
    std::vector<BigInt> squarefree;
};

FormData analyse(const RatMatrix& a) {
    FormData fd{diagonalize(a), {}};
    for (const auto& x : fd.form.d) fd.squarefree.push_back(squarefree_part(x));
    return fd;
}

bool equivalent_forms(const FormData& a, const FormData& b) {
    if (a.form.d.size() != b.form.d.size()) return false;
    if (p_signature(a.form, BigInt(-1)).value != p_signature(b.form, BigInt(-1)).value) return false;

    // det(a) / det(b) must be a square; collect the primes on the way.
    std::map<BigInt, int> parity;
    for (const auto* fd : {&a, &b})
        for (const BigInt& s : fd->squarefree) {
            for (const auto& [p, e] : factorize(s).factors) parity[p] ^= (e & 1);
        }
    for (const auto& [p, odd] : parity)
        if (odd) return false;

    std::set<BigInt> primes{BigInt(2)};
    for (const auto& entry : parity) primes.insert(entry.first);
    for (const BigInt& p : primes)
        if (p_signature(a.form, p).value != p_signature(b.form, p).value) return false;
    return true;
}

}  // namespace

bool rationally_equivalent(const RatMatrix& a, const RatMatrix& b) {
    if (a.size() != b.size()) throw std::invalid_argument("rationally_equivalent: order mismatch");
    return equivalent_forms(analyse(a), analyse(b));
}

bool rationally_equivalent(const IntMatrix& a, const IntMatrix& b) {
    return rationally_equivalent(to_rational(a), to_rational(b));
}

std::string to_string(HmVerdict v) {
    switch (v) {
        case HmVerdict::ruled_out: return "ruled-out";
        case HmVerdict::inconclusive: return "inconclusive";
        case HmVerdict::unfactored: return "unfactored";
    }
    return "?";
}

std::string to_string(HmDirection d) { return d == HmDirection::g_side ? "G^(j+1)~H^j" : "H^(j+1)~G^j"; }

HmCertificate hm_indecomposability(const IntMatrix& g, const IntMatrix& h, const HmOptions& opts) {
    if (g.order() != h.order()) throw std::invalid_argument("hm_indecomposability: order mismatch");
    if (!(char_poly(g) == char_poly(h)))
        throw std::invalid_argument("hm_indecomposability: characteristic polynomials differ");
    int n = g.order();
    int max_j = opts.max_j < 0 ? n - 1 : std::min(opts.max_j, n - 1);

    // Reduced forms: exponent parity 0 means the identity.
    std::map<std::pair<int, int>, bool> memo;
    auto reduced = [&](bool g_first, int e1, int e2) {
        const IntMatrix& a = g_first ? g : h;
        const IntMatrix& b = g_first ? h : g;
        int p1 = e1 % 2, p2 = e2 % 2;
        auto key = g_first ? std::make_pair(p1, p2) : std::make_pair(p2, p1);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        IntMatrix id = IntMatrix::identity(n);
        bool eq = rationally_equivalent(p1 ? a : id, p2 ? b : id);
        memo[key] = eq;
        return eq;
    };
    auto direct = [&](bool g_first, int e1, int e2) {
        const IntMatrix& a = g_first ? g : h;
        const IntMatrix& b = g_first ? h : g;
        return rationally_equivalent(matrix_power(a, e1), matrix_power(b, e2));
    };

    HmCertificate cert;
    for (int j = 0; j <= max_j; ++j) {
        for (HmDirection dir : {HmDirection::g_side, HmDirection::h_side}) {
            bool g_first = dir == HmDirection::g_side;
            try {
                bool eq = opts.reduce_exponents ? reduced(g_first, j + 1, j) : direct(g_first, j + 1, j);
                if (!eq) return {HmVerdict::ruled_out, j, dir};
            } catch (const FactoringBudgetExceeded&) {
                return {HmVerdict::unfactored, j, dir};
            }
        }
    }
    return cert;
}

}  // namespace maxdet
