#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace maxdet {

using BigInt = mpz_class;
using Rational = mpq_class;
using int128 = __int128;

std::string to_string(const BigInt& v);
std::string to_string(const Rational& v);
std::string to_string(int128 v);

BigInt to_big(int128 v);
int128 to_int128(const BigInt& v);  // throws std::overflow_error

bool fits_int64(const BigInt& v);
bool fits_int128(const BigInt& v);

BigInt pow_big(const BigInt& base, unsigned long exp);

// Floor square root; returns true when v is a perfect square.
bool is_square(const BigInt& v, BigInt* root = nullptr);

}  // namespace maxdet
