#pragma once

// Global upper bounds on |det| for {+1,-1} designs and the completion bounds
// used to prune the candidate Gram search.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

struct EhlichParams {
    int n = 0;
    int s = 0;
    int r = 0;
    int u = 0;
    int v = 0;
};

// Parameters for n = 3 (mod 4); throws otherwise.
EhlichParams ehlich_params(int n);

// An upper bound D on D_n, kept exact as D^2.
struct BoundValue {
    int n = 0;
    Rational squared;

    BigInt floor_root() const;
    double value() const;         // D, rounded
    Rational scaled_squared() const;  // (D / 2^(n-1))^2
    double scaled() const;        // D / 2^(n-1)
};

BoundValue hadamard_bound(int n);
BoundValue ehlich_barba_bound(int n);
BoundValue ehlich_bound(int n);

// sqrt(achieved^2 / bound^2) as a double, for reporting ratios.
double bound_ratio(const BigInt& achieved, const BoundValue& bound);

struct DStar {
    BigInt d;
    std::vector<long> gamma;
};

// max over gamma in Phi^r, subject to [[M, gamma],[gamma^T, n]] being positive
// semidefinite, of det [[M, gamma],[gamma^T, c]].  Throws if no gamma qualifies.
DStar d_star(const IntMatrix& minor, int n, long c, std::span<const long> phi);

// Same maximum over an explicit list of border vectors (no semidefinite filter).
DStar d_star(const IntMatrix& minor, long c, std::span<const std::vector<long>> gammas);

// u_r(c, d) = (n-c)^(n-r-1) [(n-c) det(M_r) + (n-r) max(0, d)], r < n.
BigInt km_bound(const IntMatrix& minor, int n, long c, const BigInt& d);

// (n-1)^(n-r) det(M_r) + [(n-1)^(n-r) - (n-3)^(n-r) - (n-r)(n-3)^(n-r-1)] max(0, d), n = 3 (mod 4).
BigInt sharper_bound(const IntMatrix& minor, int n, const BigInt& d);

// One block structure b_1 + ... + b_k = n - r and the two scalars that fix the
// determinant of any completion bordered by all -1 columns.
struct PartitionEntry {
    std::vector<int> parts;
    BigInt det_blocks;  // det(A_b)
    BigInt j_adj_j;     // j^T adj(A_b) j
};

// Integer partitions of m (decreasing lexicographic order) with cached block data.
class PartitionTable {
public:
    PartitionTable(int n, int m);
    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<PartitionEntry>& entries() const { return entries_; }

    // max_b det(A_b) det(M) - (j^T adj(A_b) j)(j^T adj(M) j), with its argmax.
    BigInt evaluate(const BigInt& det_minor, const BigInt& j_adj_minor_j, std::vector<int>* best_parts = nullptr) const;

private:
    int n_;
    int m_;
    std::vector<PartitionEntry> entries_;
};

std::vector<std::vector<int>> integer_partitions(int m);

// The (r + sum b) order matrix with M_r in the corner, diagonal blocks
// (n-3)I + 3J, off-diagonal blocks -J and all-(-1) borders.
IntMatrix partition_block_matrix(const IntMatrix& minor, int n, std::span<const int> parts);

// True when the preconditions of the partition bound hold for M_r.
bool partition_bound_applies(const IntMatrix& minor, int n);

// Throws std::domain_error when partition_bound_applies() is false.
BigInt partition_bound(const IntMatrix& minor, int n, std::vector<int>* best_parts = nullptr);

bool is_block_matrix(const IntMatrix& a, int n);

}  // namespace maxdet
