#include "maxdet/matrix.hpp"

#include <sstream>
#include <utility>

namespace maxdet {

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) : IntMatrix(static_cast<int>(rows.size())) {
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != order_) throw std::invalid_argument("IntMatrix: rows must form a square");
        int j = 0;
        for (long v : row) (*this)(i, j++) = v;
        ++i;
    }
}

IntMatrix IntMatrix::identity(int order) {
    IntMatrix m(order);
    for (int i = 0; i < order; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
    IntMatrix m(static_cast<int>(rows.size()));
    for (int i = 0; i < m.order_; ++i) {
        if (static_cast<int>(rows[i].size()) != m.order_) throw std::invalid_argument("IntMatrix: rows must form a square");
        for (int j = 0; j < m.order_; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

bool IntMatrix::is_symmetric() const {
    for (int i = 0; i < order_; ++i)
        for (int j = i + 1; j < order_; ++j)
            if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(order_);
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

IntMatrix IntMatrix::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != order_) throw std::invalid_argument("permuted: size mismatch");
    IntMatrix out(order_);
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j) out(i, j) = (*this)(perm[i], perm[j]);
    return out;
}

std::vector<std::int64_t> IntMatrix::to_int64() const {
    std::vector<std::int64_t> out(data_.size());
    for (std::size_t k = 0; k < data_.size(); ++k) {
        if (!fits_int64(data_[k])) throw std::overflow_error("IntMatrix entry exceeds 62 bits");
        out[k] = data_[k].get_si();
    }
    return out;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.order_ != b.order_) throw std::invalid_argument("matrix product: order mismatch");
    const int n = a.order_;
    IntMatrix c(n);
    BigInt acc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            acc = 0;
            for (int k = 0; k < n; ++k) acc += a(i, k) * b(k, j);
            c(i, j) = acc;
        }
    return c;
}

std::strong_ordering operator<=>(const IntMatrix& a, const IntMatrix& b) {
    if (auto c = a.order_ <=> b.order_; c != 0) return c;
    for (std::size_t k = 0; k < a.data_.size(); ++k) {
        int c = cmp(a.data_[k], b.data_[k]);
        if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

std::string IntMatrix::str() const {
    std::ostringstream os;
    for (int i = 0; i < order_; ++i) {
        for (int j = 0; j < order_; ++j) os << (j ? " " : "") << (*this)(i, j).get_str();
        os << '\n';
    }
    return os.str();
}

SignMatrix SignMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    SignMatrix m(static_cast<int>(rows.size()));
    for (int i = 0; i < m.order_; ++i) {
        if (static_cast<int>(rows[i].size()) != m.order_) throw std::invalid_argument("SignMatrix: rows must form a square");
        for (int j = 0; j < m.order_; ++j) m.set(i, j, rows[i][j]);
    }
    return m;
}

void SignMatrix::set(int i, int j, int v) {
    if (v != 1 && v != -1) throw std::invalid_argument("SignMatrix entries must be +1 or -1");
    data_[static_cast<std::size_t>(i) * order_ + j] = static_cast<std::int8_t>(v);
}

void SignMatrix::negate_row(int i) {
    for (int j = 0; j < order_; ++j) flip(i, j);
}

void SignMatrix::negate_col(int j) {
    for (int i = 0; i < order_; ++i) flip(i, j);
}

SignMatrix SignMatrix::transpose() const {
    SignMatrix t(order_);
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j) t.set(j, i, (*this)(i, j));
    return t;
}

IntMatrix SignMatrix::to_int() const {
    IntMatrix m(order_);
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

std::string SignMatrix::str() const {
    std::string s;
    for (int i = 0; i < order_; ++i) {
        for (int j = 0; j < order_; ++j) s.push_back((*this)(i, j) > 0 ? '+' : '-');
        s.push_back('\n');
    }
    return s;
}

BigInt CharPoly::evaluate(const BigInt& x) const {
    BigInt acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::string CharPoly::str() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < coeffs.size(); ++k) os << (k ? " " : "") << coeffs[k].get_str();
    return os.str();
}

// Bareiss elimination with row pivoting; every division is exact.
BigInt det_exact(const IntMatrix& m) {
    const int n = m.order();
    if (n == 0) return 1;
    std::vector<BigInt> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
    auto at = [&](int i, int j) -> BigInt& { return a[static_cast<std::size_t>(i) * n + j]; };
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (at(k, k) == 0) {
            int p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) return 0;
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                at(i, j) = at(i, j) * at(k, k) - at(i, k) * at(k, j);
                mpz_divexact(at(i, j).get_mpz_t(), at(i, j).get_mpz_t(), prev.get_mpz_t());
            }
        }
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

IntMatrix adjugate(const IntMatrix& m) {
    const int n = m.order();
    if (n == 0) return IntMatrix(0);
    if (n == 1) return IntMatrix::identity(1);
    const int w = 2 * n;
    std::vector<BigInt> a(static_cast<std::size_t>(n) * w);
    auto at = [&](int i, int j) -> BigInt& { return a[static_cast<std::size_t>(i) * w + j]; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) at(i, j) = m(i, j);
        at(i, n + i) = 1;
    }
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        if (at(k, k) == 0) {
            int p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) {
                // Singular: fall back to cofactors.
                IntMatrix adj(n);
                IntMatrix minor(n - 1);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        for (int r = 0, rr = 0; r < n; ++r) {
                            if (r == j) continue;
                            for (int c = 0, cc = 0; c < n; ++c) {
                                if (c == i) continue;
                                minor(rr, cc++) = m(r, c);
                            }
                            ++rr;
                        }
                        BigInt d = det_exact(minor);
                        adj(i, j) = ((i + j) % 2) ? BigInt(-d) : d;
                    }
                return adj;
            }
            for (int j = 0; j < w; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            for (int j = 0; j < w; ++j) {
                if (j == k) continue;
                at(i, j) = at(i, j) * at(k, k) - at(i, k) * at(k, j);
                mpz_divexact(at(i, j).get_mpz_t(), at(i, j).get_mpz_t(), prev.get_mpz_t());
            }
            at(i, k) = 0;
        }
        // Row k keeps its scale; bring it to the common scale at the end.
        prev = at(k, k);
    }
    // Every row i now reads [0..d_i..0 | right_i] with pivot d_i; scale rows to det.
    IntMatrix adj(n);
    const BigInt& det = prev;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            BigInt v = at(i, n + j) * det;
            mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), at(i, i).get_mpz_t());
            adj(i, j) = sign > 0 ? v : BigInt(-v);
        }
    }
    return adj;
}

// Faddeev-LeVerrier: N_1 = I, c_{n-k} = -tr(A N_k)/k, N_{k+1} = A N_k + c_{n-k} I.
CharPoly char_poly(const IntMatrix& m) {
    const int n = m.order();
    CharPoly p;
    p.coeffs.assign(static_cast<std::size_t>(n) + 1, 0);
    p.coeffs[n] = 1;
    IntMatrix N = IntMatrix::identity(n);
    for (int k = 1; k <= n; ++k) {
        IntMatrix AN = m * N;
        BigInt tr = 0;
        for (int i = 0; i < n; ++i) tr += AN(i, i);
        BigInt c = -tr;
        mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(k));
        p.coeffs[n - k] = c;
        if (k < n) {
            for (int i = 0; i < n; ++i) AN(i, i) += c;
            N = std::move(AN);
        }
    }
    return p;
}

namespace {

IntMatrix row_products(const SignMatrix& r, bool rows) {
    const int n = r.order();
    IntMatrix g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            long s = 0;
            for (int k = 0; k < n; ++k) s += rows ? r(i, k) * r(j, k) : r(k, i) * r(k, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

}  // namespace

IntMatrix gram(const SignMatrix& r) { return row_products(r, true); }

IntMatrix dual_gram(const SignMatrix& r) { return row_products(r, false); }

IntMatrix matrix_power(const IntMatrix& m, int exponent) {
    if (exponent < 0) throw std::invalid_argument("matrix_power: negative exponent");
    IntMatrix result = IntMatrix::identity(m.order());
    IntMatrix base = m;
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        exponent >>= 1;
        if (exponent) base = base * base;
    }
    return result;
}

namespace {

int positives_in_row(const SignMatrix& r, int i) {
    int c = 0;
    for (int j = 0; j < r.order(); ++j) c += r(i, j) > 0;
    return c;
}

int positives_in_col(const SignMatrix& r, int j) {
    int c = 0;
    for (int i = 0; i < r.order(); ++i) c += r(i, j) > 0;
    return c;
}

}  // namespace

SignMatrix parity_normalize(const SignMatrix& r) {
    const int n = r.order();
    if (n % 2 == 0) throw std::invalid_argument("parity_normalize: order must be odd");
    SignMatrix out = r;
    for (int i = 0; i < n; ++i)
        if (positives_in_row(out, i) % 2) out.negate_row(i);
    for (int j = 0; j < n; ++j)
        if (positives_in_col(out, j) % 2) out.negate_col(j);
    return out;
}

bool is_parity_normalized(const SignMatrix& r) {
    for (int i = 0; i < r.order(); ++i)
        if (positives_in_row(r, i) % 2 || positives_in_col(r, i) % 2) return false;
    return true;
}

BigInt det_sign(const SignMatrix& r) { return det_exact(r.to_int()); }

}  // namespace maxdet
