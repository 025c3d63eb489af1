#pragma once

// Determinant spectra: the set of |det R| / 2^(n-1) over n x n sign matrices.
// Low values come from a seeded local search (witnesses only); values above
// the first gap come from the exhaustive Gram search plus decomposition.

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "maxdet/bigint.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

// |det r| / 2^(n-1); always an integer.
BigInt scaled_det(const SignMatrix& r);

struct HillClimbOptions {
    std::uint64_t steps = 0;          // total moves over all restarts; 0: 8000 n^2
    std::uint64_t stall = 0;          // stop after this many moves without a new value; 0: 3000 n^2
    std::uint64_t restart_every = 0;  // 0: 8 n^2
    double noise = 0.05;              // probability of a random flip
    std::uint64_t seed = 1;
};

// Witnesses for as many targets as the budget allows.  Missing targets are
// simply absent from the result.  Supports odd and even n up to 25.
std::map<BigInt, SignMatrix> hill_climb_values(int n, const std::set<BigInt>& targets, const HillClimbOptions& opts = {});

struct SpectrumAbove {
    std::map<BigInt, SignMatrix> values;
    bool complete = true;
    std::size_t candidates = 0;
    std::size_t pairs = 0;
    std::size_t pairs_tried = 0;
    std::size_t timeouts = 0;
};

struct SpectrumAboveOptions {
    DecomposeOptions decompose;      // per pair
    bool skip_known_values = true;   // skip pairs whose determinant is already witnessed
    int workers = 0;                 // gram search workers
};

// Every achievable value v with v * 2^(n-1) >= d_min (n odd).
SpectrumAbove spectrum_above(int n, const BigInt& d_min, const SpectrumAboveOptions& opts = {});

enum class ValueSource { heuristic, decomposition };

struct SpectrumEntry {
    SignMatrix witness;
    ValueSource source = ValueSource::heuristic;
};

struct SpectrumResult {
    int n = 0;
    std::map<BigInt, SpectrumEntry> values;
    BigInt first_gap = 0;
    bool complete_above = false;  // every value >= first_gap is listed
};

struct FullSpectrumOptions {
    HillClimbOptions climb;
    SpectrumAboveOptions above;
    int max_order = 13;
};

// Throws std::invalid_argument for even n or n above max_order, and
// std::logic_error if a heuristic value above the gap is missing from the
// exhaustive part.
SpectrumResult full_spectrum(int n, const FullSpectrumOptions& opts = {});

// "0..5, 7, 8, 10..12": runs of three or more are written a..b.
std::string compress_values(const std::set<BigInt>& values);
std::set<BigInt> expand_values(const std::string& text);

}  // namespace maxdet
