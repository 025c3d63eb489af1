#pragma once

// Rational congruence of symmetric matrices (Hasse-Minkowski) and the
// indecomposability test built on it: if G = R R^T and H = R^T R then
// G^(j+1) = R H^j R^T, so G^(j+1) and H^j must be rationally equivalent.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

using RatMatrix = std::vector<std::vector<Rational>>;

RatMatrix to_rational(const IntMatrix& m);

// u * a * u^T = diag(d), exactly.
struct DiagonalForm {
    std::vector<Rational> d;
    RatMatrix u;
};

// Throws std::invalid_argument for singular or non-symmetric input.
DiagonalForm diagonalize(const RatMatrix& a);
DiagonalForm diagonalize(const IntMatrix& a);

class FactoringBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Factorization {
    int sign = 1;
    std::vector<std::pair<BigInt, int>> factors;  // ascending primes
};

// Trial division then Pollard-Brent rho; throws FactoringBudgetExceeded when
// `rho_budget` iterations do not split a composite.  0 is rejected.
Factorization factorize(const BigInt& n, std::uint64_t rho_budget = 20'000'000);

// Square-free integer in the square class of a nonzero rational.
BigInt squarefree_part(const Rational& q, std::uint64_t rho_budget = 20'000'000);

struct PSignature {
    BigInt p;   // a prime, or -1
    int value;  // p-excess mod 8 for odd p; oddity mod 8 for p = 2; n_+ - n_- for p = -1
};

PSignature p_signature(const DiagonalForm& form, const BigInt& p);

bool rationally_equivalent(const RatMatrix& a, const RatMatrix& b);
bool rationally_equivalent(const IntMatrix& a, const IntMatrix& b);

enum class HmVerdict { ruled_out, inconclusive, unfactored };
enum class HmDirection { g_side, h_side };  // G^(j+1) vs H^j, or H^(j+1) vs G^j

std::string to_string(HmVerdict v);
std::string to_string(HmDirection d);

struct HmCertificate {
    HmVerdict verdict = HmVerdict::inconclusive;
    int j = -1;
    HmDirection direction = HmDirection::g_side;
};

struct HmOptions {
    // Use A^(2k) ~ I and A^(2k+1) ~ A instead of forming the powers.
    bool reduce_exponents = true;
    int max_j = -1;  // -1: n - 1
};

// Least j < n for which one of the two equivalences fails.
HmCertificate hm_indecomposability(const IntMatrix& g, const IntMatrix& h, const HmOptions& opts = {});

}  // namespace maxdet
