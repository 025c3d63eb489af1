#include "maxdet/bigint.hpp"

#include <algorithm>
#include <stdexcept>

namespace maxdet {

std::string to_string(const BigInt& v) { return v.get_str(); }

std::string to_string(const Rational& v) { return v.get_str(); }

std::string to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

BigInt to_big(int128 v) {
    BigInt out;
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    auto hi = static_cast<std::uint64_t>(u >> 64);
    auto lo = static_cast<std::uint64_t>(u);
    mpz_import(out.get_mpz_t(), 1, 1, sizeof(std::uint64_t), 0, 0, &hi);
    out <<= 64;
    BigInt low;
    mpz_import(low.get_mpz_t(), 1, 1, sizeof(std::uint64_t), 0, 0, &lo);
    out += low;
    if (neg) out = -out;
    return out;
}

bool fits_int64(const BigInt& v) { return mpz_sizeinbase(v.get_mpz_t(), 2) <= 62; }

bool fits_int128(const BigInt& v) { return mpz_sizeinbase(v.get_mpz_t(), 2) <= 126; }

int128 to_int128(const BigInt& v) {
    if (!fits_int128(v)) throw std::overflow_error("value does not fit in 128 bits: " + v.get_str());
    BigInt a = abs(v);
    std::uint64_t words[2] = {0, 0};
    std::size_t count = 0;
    mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, a.get_mpz_t());
    unsigned __int128 u = (static_cast<unsigned __int128>(words[1]) << 64) | words[0];
    auto r = static_cast<int128>(u);
    return v < 0 ? -r : r;
}

BigInt pow_big(const BigInt& base, unsigned long exp) {
    BigInt out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
    return out;
}

bool is_square(const BigInt& v, BigInt* root) {
    if (v < 0) return false;
    BigInt r;
    mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
    if (root) *root = r;
    return r * r == v;
}

}  // namespace maxdet
