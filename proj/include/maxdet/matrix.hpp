#pragma once

// Exact square matrices over the integers and over {+1,-1}.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"

namespace maxdet {

class IntMatrix {
public:
    IntMatrix() = default;
    explicit IntMatrix(int order) : order_(order), data_(static_cast<std::size_t>(order) * order) {}
    IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

    static IntMatrix identity(int order);
    static IntMatrix from_rows(const std::vector<std::vector<long>>& rows);

    int order() const { return order_; }

    BigInt& operator()(int i, int j) { return data_[index(i, j)]; }
    const BigInt& operator()(int i, int j) const { return data_[index(i, j)]; }

    bool is_symmetric() const;
    IntMatrix transpose() const;
    IntMatrix permuted(std::span<const int> perm) const;  // result(i,j) = (*this)(perm[i], perm[j])

    // Entries as machine integers; throws if any entry exceeds 62 bits.
    std::vector<std::int64_t> to_int64() const;

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
    friend bool operator==(const IntMatrix& a, const IntMatrix& b) = default;
    friend std::strong_ordering operator<=>(const IntMatrix& a, const IntMatrix& b);

    std::string str() const;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * order_ + j; }

    int order_ = 0;
    std::vector<BigInt> data_;
};

// A square design with entries in {+1,-1}, stored as int8.
class SignMatrix {
public:
    SignMatrix() = default;
    explicit SignMatrix(int order) : order_(order), data_(static_cast<std::size_t>(order) * order, 1) {}
    static SignMatrix from_rows(const std::vector<std::vector<int>>& rows);

    int order() const { return order_; }

    int operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * order_ + j]; }
    void set(int i, int j, int v);
    void flip(int i, int j) { auto& e = data_[static_cast<std::size_t>(i) * order_ + j]; e = static_cast<std::int8_t>(-e); }
    void negate_row(int i);
    void negate_col(int j);

    SignMatrix transpose() const;
    IntMatrix to_int() const;

    // Rows as '+'/'-' strings.
    std::string str() const;

    friend bool operator==(const SignMatrix& a, const SignMatrix& b) = default;
    friend auto operator<=>(const SignMatrix& a, const SignMatrix& b) = default;

private:
    int order_ = 0;
    std::vector<std::int8_t> data_;
};

// Monic characteristic polynomial det(lambda I - A); coeffs[k] multiplies lambda^k.
struct CharPoly {
    std::vector<BigInt> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    BigInt evaluate(const BigInt& x) const;
    std::string str() const;

    friend bool operator==(const CharPoly&, const CharPoly&) = default;
    friend bool operator<(const CharPoly& a, const CharPoly& b) { return a.coeffs < b.coeffs; }
};

BigInt det_exact(const IntMatrix& m);
// adj(M) with adj(M) * M = det(M) * I.
IntMatrix adjugate(const IntMatrix& m);
CharPoly char_poly(const IntMatrix& m);
IntMatrix gram(const SignMatrix& r);
IntMatrix dual_gram(const SignMatrix& r);
IntMatrix matrix_power(const IntMatrix& m, int exponent);

// The unique row/column negation of an odd-order design with an even number
// of +1 entries in every row and column.
SignMatrix parity_normalize(const SignMatrix& r);
bool is_parity_normalized(const SignMatrix& r);

// Determinant of a design, computed exactly.
BigInt det_sign(const SignMatrix& r);

}  // namespace maxdet
