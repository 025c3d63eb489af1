#pragma once

// Search for {+1,-1} matrices R with R R^T = G and R^T R = H using frame
// variables: rows are built one at a time, columns grouped into frames whose
// members are interchangeable, and each row is described by the number of +1
// entries it places in every frame.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

// Frame widths; frames are contiguous column ranges in order.
struct Framing {
    std::vector<int> w;

    int size() const { return static_cast<int>(w.size()); }
    int total() const;
};

// The first k rows of R in compressed form: column i of Q stands for w[i]
// identical columns of R.
struct FrameState {
    int k = 0;
    int n = 0;
    std::vector<std::vector<int>> q;  // k rows, each of length m, entries +-1
    Framing w;

    static FrameState initial(const Framing& framing);
    // Rows of R obtained by expanding every column of Q w[i] times.
    std::vector<std::vector<int>> expand() const;
};

// All integer x with Q (2x - w) = rhs and 0 <= x_i <= w_i.
std::vector<std::vector<int>> solve_frame_system(const FrameState& state, std::span<const long> rhs);

FrameState refine_framing(const FrameState& state, std::span<const int> x);

// Maximal classes of indices that H cannot tell apart, made contiguous.
struct InitialFraming {
    Framing framing;
    std::vector<int> order;  // new index i holds old index order[i]
};

InitialFraming initial_framing(const IntMatrix& h);

struct GramPairContext {
    IntMatrix g;
    IntMatrix h;                 // as given
    IntMatrix h_framed;          // h with indices reordered by `order`
    std::vector<int> order;
    Framing framing;
    std::vector<int> jset;
    std::vector<IntMatrix> g_pow;  // G^(j+1), aligned with jset
    std::vector<IntMatrix> h_pow;  // (h_framed)^j
    bool same_char_poly = false;

    static GramPairContext make(const IntMatrix& g, const IntMatrix& h, std::vector<int> jset = {1, 2});
};

// G^(j+1) restricted to the first k rows and columns equals R_1 H^j R_1^T,
// where R_1 is the expansion of `state` (columns in h_framed order).
bool check_gram_pair(const FrameState& state, const GramPairContext& ctx, int j);

enum class DecompositionStatus { solutions, none, timeout };

std::string to_string(DecompositionStatus status);

struct DecompositionOutcome {
    DecompositionStatus status = DecompositionStatus::none;
    std::vector<SignMatrix> solutions;  // columns in the original order of H; one per class of column orders inside frames
    std::uint64_t nodes = 0;
    int max_level = 0;  // most rows of R fixed at any node
    bool exhaustive = false;  // no budget cut the search short
};

struct DecomposeOptions {
    std::uint64_t node_budget = 0;   // 0: unlimited
    double seconds_budget = 0.0;     // 0: unlimited
    bool fix_global_sign = false;    // keep only one of R and -R
};

DecompositionOutcome decompose_first(const GramPairContext& ctx, const DecomposeOptions& opts = {});
DecompositionOutcome decompose_all(const GramPairContext& ctx, const DecomposeOptions& opts = {});
DecompositionOutcome decompose_random(const GramPairContext& ctx, std::uint64_t seed, int fanout, const DecomposeOptions& opts = {});

struct CandidatePair {
    std::size_t first = 0;
    std::size_t second = 0;  // first <= second
};

// Unordered pairs (including (G, G)) with equal characteristic polynomials.
// Throws std::invalid_argument on repeated matrices.
std::vector<CandidatePair> enumerate_pairs(std::span<const IntMatrix> candidates);

// Every R with first row all +1 and R R^T = G, by row-by-row enumeration.
std::vector<SignMatrix> decompose_v1_oracle(const IntMatrix& g, int max_order = 9);

}  // namespace maxdet
