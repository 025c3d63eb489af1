#pragma once

// End-to-end runs: Gram search, pairing, decomposition, Hasse-Minkowski on
// the failures, and equivalence classes of the optimal designs.  Also the
// candidate-file verifier and the append-only run ledger.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/gram_search.hpp"
#include "maxdet/io.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

struct CandidateCheck {
    bool symmetric = false;
    bool positive_definite = false;
    bool diagonal = false;    // every diagonal entry equals n
    bool congruence = false;  // off-diagonal entries = n (mod 4)
    bool square_det = false;
    bool threshold = false;   // det >= d_min^2
    BigInt det;

    bool ok() const { return symmetric && positive_definite && diagonal && congruence && square_det && threshold; }
    std::string failures() const;  // comma separated names, empty when ok
};

CandidateCheck check_candidate(const IntMatrix& m, int n, const BigInt& d_min);

struct VerifyReport {
    std::vector<CandidateCheck> checks;
    std::size_t passed = 0;
    std::size_t classes = 0;  // Gram equivalence classes among the inputs
    std::set<BigInt> dets;

    bool ok() const { return passed == checks.size() && classes == checks.size(); }
};

VerifyReport verify_candidates(std::span<const IntMatrix> grams, int n, const BigInt& d_min);

struct PipelineOptions {
    BigInt d_min = 0;             // 0: lower the threshold from the bound until something decomposes
    DecomposeOptions decompose;   // per pair
    bool run_hasse = true;        // on pairs that do not decompose
    bool classify_optimal = true; // decompose_all on the optimal pairs and count design classes
    DecomposeOptions classify;    // budget for those decompose_all runs
    int workers = 0;
};

struct PipelineSummary {
    int n = 0;
    BigInt d_min = 0;
    std::vector<BigInt> thresholds;  // d_min values tried, in order
    std::size_t candidates = 0;
    std::size_t pairs = 0;
    std::size_t decomposed_pairs = 0;
    std::vector<CandidatePair> decomposed;  // indices into grams
    std::size_t decomposable_candidates = 0;
    std::size_t timeouts = 0;
    std::size_t hm_ruled_out = 0;
    std::size_t hm_inconclusive = 0;
    std::size_t hm_unfactored = 0;
    std::uint64_t search_nodes = 0;
    std::uint64_t decompose_nodes = 0;
    std::set<BigInt> values;      // |det| / 2^(n-1) of decomposable candidates
    std::optional<BigInt> d_n;    // maximal determinant, when the run proves it
    std::size_t optimal_raw = 0;  // solutions found for the optimal pairs, with transposes
    std::vector<SignMatrix> optimal_classes;  // one representative per design class
    bool complete = false;
    std::vector<bool> decomposable;  // per candidate
    std::vector<IntMatrix> grams;
};

PipelineSummary run_pipeline(int n, const PipelineOptions& opts = {});
// Same, on a supplied candidate list (treated as the complete search output at file.dmin2).
PipelineSummary run_pipeline_on(const CandidateFile& file, const PipelineOptions& opts = {});

struct RunLedgerEntry {
    std::string command;
    std::string config_hash;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;   // path -> sha256
    std::map<std::string, std::string> outputs;  // path -> sha256
    std::uint64_t nodes = 0;
    double seconds = 0.0;
    bool complete = true;
};

// sha256 over the sorted key=value lines of the config.
std::string config_digest(const std::map<std::string, std::string>& config);

// One JSON object per line.
std::string to_json_line(const RunLedgerEntry& e);
RunLedgerEntry from_json_line(const std::string& line);
void append_ledger(const std::string& path, const RunLedgerEntry& e);
std::vector<RunLedgerEntry> read_ledger(const std::string& path);

}  // namespace maxdet
