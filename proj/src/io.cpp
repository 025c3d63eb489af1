#include "maxdet/io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace maxdet {

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    BigInt parse() {
        BigInt v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError("bad integer expression \"" + s_ + "\": " + what);
    }

    BigInt sum() {
        BigInt v = product();
        for (;;) {
            if (eat('+')) v += product();
            else if (eat('-')) v -= product();
            else return v;
        }
    }
    BigInt product() {
        BigInt v = negation();
        while (eat('*')) v *= negation();
        return v;
    }
    // Unary minus binds looser than '^': -2^2 = -4.
    BigInt negation() {
        if (eat('-')) return -negation();
        return power();
    }
    BigInt power() {
        BigInt base = atom();
        if (!eat('^')) return base;
        BigInt e = negation();  // right associative
        if (e < 0 || !e.fits_ulong_p()) fail("exponent out of range");
        return pow_big(base, e.get_ui());
    }
    BigInt atom() {
        if (eat('(')) {
            BigInt v = sum();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a number");
        return BigInt(s_.substr(start, pos_ - start));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

bool next_line(std::istream& in, std::string& line, long& line_no) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::string header_field(const std::string& header, const std::string& key) {
    std::istringstream ss(header);
    std::string tok;
    while (ss >> tok)
        if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    throw FormatError("header lacks " + key + "=: " + header);
}

int parse_order(const std::string& text) {
    try {
        std::size_t used = 0;
        int n = std::stoi(text, &used);
        if (used != text.size() || n < 1) throw FormatError("bad order " + text);
        return n;
    } catch (const std::logic_error&) {
        throw FormatError("bad order " + text);
    }
}

}  // namespace

BigInt parse_int_expr(const std::string& text) { return ExprParser(text).parse(); }

void write_candidate_block(std::ostream& out, const CandidateMinor& c) {
    out << "det2=" << c.det.get_str() << '\n';
    for (int i = 0; i < c.order(); ++i) {
        for (int j = 0; j < c.order(); ++j) {
            if (j) out << ' ';
            out << c.m(i, j).get_str();
        }
        out << '\n';
    }
}

void write_candidates(std::ostream& out, const CandidateFile& file) {
    out << "maxdet-gram v1 n=" << file.n << " dmin2=" << file.dmin2.get_str() << '\n';
    for (const auto& c : file.candidates) {
        out << '\n';
        write_candidate_block(out, c);
    }
}

bool read_candidate_block(std::istream& in, int n, CandidateMinor& out, long& line_no) {
    std::string line;
    do {
        if (!next_line(in, line, line_no)) return false;
    } while (line.empty());
    if (line.rfind("det2=", 0) != 0) throw FormatError("line " + std::to_string(line_no) + ": expected det2=");
    BigInt det;
    if (det.set_str(line.substr(5), 10) != 0) throw FormatError("line " + std::to_string(line_no) + ": bad det2 value");
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (!next_line(in, line, line_no)) throw FormatError("line " + std::to_string(line_no) + ": truncated candidate block");
        std::istringstream ss(line);
        std::string tok;
        int j = 0;
        while (ss >> tok) {
            if (j >= n) throw FormatError("line " + std::to_string(line_no) + ": too many entries");
            if (m(i, j).set_str(tok, 10) != 0) throw FormatError("line " + std::to_string(line_no) + ": bad entry " + tok);
            ++j;
        }
        if (j != n) throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(n) + " entries");
    }
    if (!m.is_symmetric()) throw FormatError("line " + std::to_string(line_no) + ": matrix is not symmetric");
    out = {std::move(m), std::move(det)};
    return true;
}

CandidateFile read_candidates(std::istream& in) {
    std::string line;
    long line_no = 0;
    if (!next_line(in, line, line_no) || line.rfind("maxdet-gram v1", 0) != 0)
        throw FormatError("line 1: missing maxdet-gram v1 header");
    CandidateFile file;
    file.n = parse_order(header_field(line, "n"));
    if (file.dmin2.set_str(header_field(line, "dmin2"), 10) != 0) throw FormatError("bad dmin2 in header");
    CandidateMinor c;
    while (read_candidate_block(in, file.n, c, line_no)) file.candidates.push_back(std::move(c));
    return file;
}

CandidateFile read_candidates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return read_candidates(in);
}

void write_candidates_file(const std::string& path, const CandidateFile& file) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    write_candidates(out, file);
}

void write_solutions(std::ostream& out, const SolutionFile& file) {
    out << "maxdet-sol v1 n=" << file.n << '\n';
    for (const auto& d : file.designs) out << '\n' << d.str();
}

SolutionFile read_solutions(std::istream& in) {
    std::string line;
    long line_no = 0;
    if (!next_line(in, line, line_no) || line.rfind("maxdet-sol v1", 0) != 0)
        throw FormatError("line 1: missing maxdet-sol v1 header");
    SolutionFile file;
    file.n = parse_order(header_field(line, "n"));
    std::vector<std::vector<int>> rows;
    auto flush = [&] {
        if (rows.empty()) return;
        if (static_cast<int>(rows.size()) != file.n) throw FormatError("design with wrong number of rows near line " + std::to_string(line_no));
        file.designs.push_back(SignMatrix::from_rows(rows));
        rows.clear();
    };
    while (next_line(in, line, line_no)) {
        if (line.empty()) {
            flush();
            continue;
        }
        if (static_cast<int>(line.size()) != file.n) throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(file.n) + " signs");
        std::vector<int> row;
        for (char ch : line) {
            if (ch == '+') row.push_back(1);
            else if (ch == '-') row.push_back(-1);
            else throw FormatError("line " + std::to_string(line_no) + ": unexpected character");
        }
        rows.push_back(std::move(row));
    }
    flush();
    return file;
}

SolutionFile read_solutions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return read_solutions(in);
}

void write_solutions_file(const std::string& path, const SolutionFile& file) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    write_solutions(out, file);
}

MatrixList parse_matrix_text(std::istream& in) {
    MatrixList list;
    bool kind_known = false;
    std::vector<std::vector<BigInt>> rows;
    long line_no = 0, block_start = 0;
    auto flush = [&] {
        if (rows.empty()) return;
        int n = static_cast<int>(rows.size());
        for (const auto& r : rows)
            if (static_cast<int>(r.size()) != n)
                throw FormatError("line " + std::to_string(block_start) + ": block is not square");
        if (list.signs) {
            std::vector<std::vector<int>> sr;
            for (const auto& r : rows) {
                sr.emplace_back();
                for (const auto& v : r) sr.back().push_back(static_cast<int>(v.get_si()));
            }
            list.sign_matrices.push_back(SignMatrix::from_rows(sr));
        } else {
            IntMatrix m(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
            list.int_matrices.push_back(std::move(m));
        }
        rows.clear();
    };
    std::string line;
    while (next_line(in, line, line_no)) {
        if (line.find_first_not_of(" \t") == std::string::npos) {
            flush();
            continue;
        }
        if (line[0] == '#' || line.rfind("det2=", 0) == 0 || line.rfind("maxdet-", 0) == 0) continue;
        bool sign_row = line.find_first_not_of("+-") == std::string::npos;
        if (!kind_known) {
            list.signs = sign_row;
            kind_known = true;
        } else if (sign_row != list.signs) {
            throw FormatError("line " + std::to_string(line_no) + ": mixes sign rows and integer rows");
        }
        if (rows.empty()) block_start = line_no;
        std::vector<BigInt> row;
        if (sign_row) {
            for (char ch : line) row.emplace_back(ch == '+' ? 1 : -1);
        } else {
            std::istringstream ss(line);
            std::string tok;
            while (ss >> tok) {
                BigInt v;
                if (v.set_str(tok, 10) != 0) throw FormatError("line " + std::to_string(line_no) + ": bad entry " + tok);
                row.push_back(std::move(v));
            }
        }
        rows.push_back(std::move(row));
    }
    flush();
    return list;
}

MatrixList parse_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return parse_matrix_text(in);
}

void write_matrix_text(std::ostream& out, const MatrixList& list) {
    for (std::size_t k = 0; k < list.size(); ++k) {
        if (k) out << '\n';
        if (list.signs) {
            out << list.sign_matrices[k].str();
        } else {
            const IntMatrix& m = list.int_matrices[k];
            for (int i = 0; i < m.order(); ++i) {
                for (int j = 0; j < m.order(); ++j) out << (j ? " " : "") << m(i, j).get_str();
                out << '\n';
            }
        }
    }
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return ss.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

}  // namespace maxdet
