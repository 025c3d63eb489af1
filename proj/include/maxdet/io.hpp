#pragma once

// Text formats shared by the tools, plus the integer expression parser used
// for command-line thresholds.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxdet/bigint.hpp"
#include "maxdet/gram_search.hpp"
#include "maxdet/matrix.hpp"

namespace maxdet {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integer literals combined with + - * ^ and parentheses, e.g. "833*4^6*2^18".
BigInt parse_int_expr(const std::string& text);

struct CandidateFile {
    int n = 0;
    BigInt dmin2 = 0;
    std::vector<CandidateMinor> candidates;
};

// maxdet-gram v1: header line, then blank-line separated blocks of
// "det2=<det>" followed by n rows of space-separated integers.
void write_candidate_block(std::ostream& out, const CandidateMinor& c);
void write_candidates(std::ostream& out, const CandidateFile& file);
CandidateFile read_candidates(std::istream& in);
CandidateFile read_candidates_file(const std::string& path);
void write_candidates_file(const std::string& path, const CandidateFile& file);

// Reads one candidate block; returns false at end of input.  `line_no` tracks
// position for error messages.
bool read_candidate_block(std::istream& in, int n, CandidateMinor& out, long& line_no);

struct SolutionFile {
    int n = 0;
    std::vector<SignMatrix> designs;
};

// maxdet-sol v1: header line, then blank-line separated designs of n rows of '+'/'-'.
void write_solutions(std::ostream& out, const SolutionFile& file);
SolutionFile read_solutions(std::istream& in);
SolutionFile read_solutions_file(const std::string& path);
void write_solutions_file(const std::string& path, const SolutionFile& file);

// Bare matrix lists: square blocks separated by blank lines, rows either of
// '+'/'-' characters or of whitespace-separated integers.  Lines starting with
// '#', det2= lines and maxdet-gram/maxdet-sol headers are skipped, so the
// typed formats above parse too.
struct MatrixList {
    bool signs = false;
    std::vector<SignMatrix> sign_matrices;
    std::vector<IntMatrix> int_matrices;

    std::size_t size() const { return signs ? sign_matrices.size() : int_matrices.size(); }
};

MatrixList parse_matrix_text(std::istream& in);
MatrixList parse_matrix_file(const std::string& path);
void write_matrix_text(std::ostream& out, const MatrixList& list);

// Hex SHA-256 of a byte string or of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace maxdet
