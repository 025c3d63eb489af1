#pragma once

// Bound-pruned enumeration of candidate Gram matrices, one representative per
// Gram-equivalence class.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

enum class BoundPolicy { none, km, sharper, partition, automatic };

BoundPolicy parse_bound_policy(const std::string& name);
std::string to_string(BoundPolicy policy);

// Off-diagonal values that a parity-normalized Gram matrix of order n can hold.
struct AdmissibleSet {
    int n = 0;
    std::vector<long> phi;  // ascending
    long c = 1;             // smallest magnitude in phi
};

AdmissibleSet admissible_values(int n);

struct CandidateMinor {
    IntMatrix m;
    BigInt det;

    int order() const { return m.order(); }
};

// [[M, f],[f^T, n]]; std::nullopt when the result is not positive definite.
std::optional<CandidateMinor> extend_minor(const CandidateMinor& minor, std::span<const long> f, int n);

// Symmetric candidate property checks (positive definite, diagonal n, off-diagonal = n mod 4).
bool is_candidate_minor(const IntMatrix& m, int n);
bool is_candidate_gram(const IntMatrix& m, int n, const BigInt& d_min);

// True iff M is the largest member of its simultaneous-permutation orbit when
// read row by row along the strict lower triangle.
bool is_lex_canonical(const IntMatrix& m);

// Largest member of the orbit (the form emitted by the search).
IntMatrix lex_canonical_form(const IntMatrix& m);

struct SearchConfig {
    int n = 0;
    BigInt d_min = 1;
    BoundPolicy bound = BoundPolicy::automatic;
    std::string checkpoint_path;  // empty: no checkpointing
    int subtree_index = 0;
    int subtree_count = 1;
    int split_depth = 0;  // 0: automatic
    int workers = 0;      // 0: MAXDET_WORKERS or hardware concurrency
};

struct SearchStats {
    std::uint64_t nodes = 0;
    std::vector<std::uint64_t> nodes_per_level;
    std::uint64_t frontier_units = 0;
    std::uint64_t units_processed = 0;
    std::uint64_t units_resumed = 0;
    std::uint64_t partition_fallbacks = 0;
    double seconds = 0.0;
};

struct SearchResult {
    std::vector<CandidateMinor> candidates;  // det descending, then entries ascending
    SearchStats stats;
};

// Called with each unit's sorted candidate list as it completes.
using UnitCallback = std::function<void(std::size_t unit, const std::vector<CandidateMinor>&)>;

SearchResult search_grams(const SearchConfig& config);

// Splits the level-`depth` frontier into at most `count` disjoint work units.
std::vector<SearchConfig> split_subtrees(const SearchConfig& config, int depth, int count);

// Number of search nodes of order `depth` (the frontier used for splitting).
std::size_t frontier_size(const SearchConfig& config, int depth);

int effective_split_depth(const SearchConfig& config);

// Union of unit outputs in the search's canonical order, duplicates removed.
std::vector<CandidateMinor> merge_candidates(std::vector<CandidateMinor> all);

}  // namespace maxdet
