#pragma once

// Canonical forms under signed permutations.  Both problems are encoded as
// edge-coloured complete graphs (one vertex per signed row or column) and
// labelled canonically by partition refinement plus backtracking with
// automorphism pruning.

#include <cstdint>
#include <span>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

// A vertex-coloured complete graph with coloured edges: colour(i, i) is the
// vertex colour, colour(i, j) = colour(j, i) the edge colour.
class ColouredGraph {
public:
    explicit ColouredGraph(int size) : size_(size), c_(static_cast<std::size_t>(size) * size) {}

    int size() const { return size_; }
    std::int64_t operator()(int i, int j) const { return c_[static_cast<std::size_t>(i) * size_ + j]; }
    void set(int i, int j, std::int64_t colour);

private:
    int size_;
    std::vector<std::int64_t> c_;
};

struct CanonicalLabelling {
    std::vector<int> lab;  // lab[k] = vertex placed at position k
    std::uint64_t leaves = 0;
    std::uint64_t automorphisms = 0;
};

// Two graphs receive identical relabelled colour matrices iff they are isomorphic.
CanonicalLabelling canonical_labelling(const ColouredGraph& g);

// result(i, j) = sign[i] * sign[j] * m(perm[i], perm[j]).
struct SignedPermutation {
    std::vector<int> perm;
    std::vector<int> sign;

    static SignedPermutation identity(int n);
    IntMatrix apply(const IntMatrix& m) const;
};

SignMatrix apply_signed(const SignMatrix& r, const SignedPermutation& rows, const SignedPermutation& cols);

struct Fingerprint {
    CharPoly char_poly;
    std::vector<std::vector<std::int64_t>> rows;  // sorted multiset of sorted |row| values
    std::vector<std::vector<std::int64_t>> cols;

    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

Fingerprint gram_fingerprint(const IntMatrix& g);
// Built from R R^T and R^T R.
Fingerprint hadamard_fingerprint(const SignMatrix& r);

struct GramCertificate {
    IntMatrix canonical;
    SignedPermutation transform;  // transform.apply(input) == canonical
    Fingerprint fingerprint;
};

struct HadamardCertificate {
    SignMatrix canonical;
    SignedPermutation rows;  // apply_signed(input, rows, cols) == canonical
    SignedPermutation cols;
    Fingerprint fingerprint;
};

GramCertificate gram_canonical(const IntMatrix& g);
HadamardCertificate hadamard_canonical(const SignMatrix& r);

// Throw std::invalid_argument on order mismatch.
bool are_gram_equivalent(const IntMatrix& a, const IntMatrix& b);
bool are_hadamard_equivalent(const SignMatrix& a, const SignMatrix& b);

// Representatives of the classes, in order of first appearance, and for each
// input the index of its class.
struct ClassPartition {
    std::vector<std::size_t> representatives;
    std::vector<std::size_t> class_of;
};

ClassPartition gram_classes(std::span<const IntMatrix> grams);
ClassPartition hadamard_classes(std::span<const SignMatrix> designs);

}  // namespace maxdet
