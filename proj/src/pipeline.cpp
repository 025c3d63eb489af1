#include "maxdet/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "maxdet/bounds.hpp"
#include "maxdet/equivalence.hpp"
#include "maxdet/rational_forms.hpp"

namespace maxdet {

std::string CandidateCheck::failures() const {
    std::string out;
    auto add = [&](bool ok, const char* name) {
        if (ok) return;
        if (!out.empty()) out += ",";
        out += name;
    };
    add(symmetric, "symmetric");
    add(positive_definite, "positive-definite");
    add(diagonal, "diagonal");
    add(congruence, "congruence");
    add(square_det, "square-det");
    add(threshold, "threshold");
    return out;
}

CandidateCheck check_candidate(const IntMatrix& m, int n, const BigInt& d_min) {
    CandidateCheck c;
    int k = m.order();
    c.symmetric = m.is_symmetric();
    c.diagonal = k == n;
    c.congruence = k == n;
    for (int i = 0; i < k; ++i) {
        if (m(i, i) != n) c.diagonal = false;
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            BigInt r = m(i, j) - n;
            if (mpz_divisible_ui_p(r.get_mpz_t(), 4) == 0) c.congruence = false;
        }
    }
    c.positive_definite = c.symmetric;
    for (int s = 1; s <= k && c.positive_definite; ++s) {
        IntMatrix lead(s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) lead(i, j) = m(i, j);
        BigInt d = det_exact(lead);
        if (d <= 0) c.positive_definite = false;
        if (s == k) c.det = d;
    }
    if (!c.positive_definite) c.det = det_exact(m);
    c.square_det = c.det > 0 && is_square(c.det);
    c.threshold = c.det >= d_min * d_min;
    return c;
}

VerifyReport verify_candidates(std::span<const IntMatrix> grams, int n, const BigInt& d_min) {
    VerifyReport r;
    std::vector<IntMatrix> sym;
    std::size_t asym = 0;
    for (const auto& g : grams) {
        r.checks.push_back(check_candidate(g, n, d_min));
        if (r.checks.back().ok()) ++r.passed;
        r.dets.insert(r.checks.back().det);
        if (r.checks.back().symmetric) sym.push_back(g);
        else ++asym;
    }
    r.classes = gram_classes(sym).representatives.size() + asym;
    return r;
}

namespace {

BigInt scaled_value(const BigInt& det, int n) {
    BigInt root;
    is_square(det, &root);
    return n > 1 ? BigInt(root >> (n - 1)) : root;
}

}  // namespace

PipelineSummary run_pipeline_on(const CandidateFile& file, const PipelineOptions& opts) {
    PipelineSummary s;
    s.n = file.n;
    is_square(file.dmin2, &s.d_min);
    s.thresholds.push_back(s.d_min);
    s.candidates = file.candidates.size();
    for (const auto& c : file.candidates) s.grams.push_back(c.m);
    s.decomposable.assign(s.candidates, false);

    auto pairs = enumerate_pairs(s.grams);
    s.pairs = pairs.size();
    for (const auto& p : pairs) {
        auto ctx = GramPairContext::make(s.grams[p.first], s.grams[p.second]);
        auto res = decompose_first(ctx, opts.decompose);
        s.decompose_nodes += res.nodes;
        if (res.status == DecompositionStatus::solutions) {
            ++s.decomposed_pairs;
            s.decomposable[p.first] = s.decomposable[p.second] = true;
            s.decomposed.push_back(p);
            continue;
        }
        if (res.status == DecompositionStatus::timeout) ++s.timeouts;
        if (opts.run_hasse) {
            auto cert = hm_indecomposability(s.grams[p.first], s.grams[p.second]);
            if (cert.verdict == HmVerdict::ruled_out) ++s.hm_ruled_out;
            else if (cert.verdict == HmVerdict::unfactored) ++s.hm_unfactored;
            else ++s.hm_inconclusive;
        }
    }
    for (std::size_t i = 0; i < s.candidates; ++i)
        if (s.decomposable[i]) {
            ++s.decomposable_candidates;
            s.values.insert(scaled_value(file.candidates[i].det, s.n));
        }
    s.complete = s.timeouts == 0;
    if (!s.complete || s.values.empty()) return s;

    BigInt best = *s.values.rbegin();
    s.d_n = s.n > 1 ? BigInt(best << (s.n - 1)) : best;
    if (!opts.classify_optimal) return s;

    std::vector<SignMatrix> designs;
    BigInt best_det = *s.d_n * *s.d_n;
    for (const auto& p : s.decomposed) {
        if (file.candidates[p.first].det != best_det) continue;
        auto ctx = GramPairContext::make(s.grams[p.first], s.grams[p.second]);
        auto res = decompose_all(ctx, opts.classify);
        if (res.status == DecompositionStatus::timeout) s.complete = false;
        for (auto& r : res.solutions) {
            if (p.first != p.second) designs.push_back(r.transpose());
            designs.push_back(std::move(r));
        }
    }
    s.optimal_raw = designs.size();
    for (std::size_t idx : hadamard_classes(designs).representatives) s.optimal_classes.push_back(designs[idx]);
    return s;
}

PipelineSummary run_pipeline(int n, const PipelineOptions& opts) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("run_pipeline: n must be odd");
    auto run_at = [&](const BigInt& d_min) {
        SearchConfig cfg;
        cfg.n = n;
        cfg.d_min = d_min > 0 ? d_min : BigInt(1);
        cfg.workers = opts.workers;
        SearchResult found = search_grams(cfg);
        CandidateFile file{n, cfg.d_min * cfg.d_min, std::move(found.candidates)};
        PipelineSummary s = run_pipeline_on(file, opts);
        s.search_nodes = found.stats.nodes;
        return s;
    };
    if (opts.d_min > 0) return run_at(opts.d_min);

    // Lower the threshold from the bound in growing steps until a design appears.
    BigInt top = 1;
    if (n > 1) {
        BoundValue b = (n % 4 == 3) ? ehlich_bound(n) : ehlich_barba_bound(n);
        top = b.floor_root() >> (n - 1);
    }
    std::vector<BigInt> tried;
    BigInt t = top, step = 1;
    std::uint64_t search_nodes = 0;
    for (;;) {
        BigInt d_min = n > 1 ? BigInt(t << (n - 1)) : t;
        PipelineSummary s = run_at(d_min);
        tried.push_back(s.d_min);
        search_nodes += s.search_nodes;
        if (s.d_n || t == 0 || !s.complete) {
            s.thresholds = tried;
            s.search_nodes = search_nodes;
            return s;
        }
        t = t > step ? BigInt(t - step) : BigInt(0);
        step *= 2;
    }
}

std::string config_digest(const std::map<std::string, std::string>& config) {
    std::string text;
    for (const auto& [k, v] : config) text += k + "=" + v + "\n";
    return sha256_hex(text);
}

std::string to_json_line(const RunLedgerEntry& e) {
    nlohmann::ordered_json j;
    j["command"] = e.command;
    j["config_hash"] = e.config_hash;
    j["config"] = e.config;
    j["inputs"] = e.inputs;
    j["outputs"] = e.outputs;
    j["nodes"] = e.nodes;
    j["seconds"] = e.seconds;
    j["complete"] = e.complete;
    return j.dump();
}

RunLedgerEntry from_json_line(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    RunLedgerEntry e;
    e.command = j.at("command").get<std::string>();
    e.config_hash = j.at("config_hash").get<std::string>();
    e.config = j.at("config").get<std::map<std::string, std::string>>();
    e.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    e.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    e.nodes = j.at("nodes").get<std::uint64_t>();
    e.seconds = j.at("seconds").get<double>();
    e.complete = j.at("complete").get<bool>();
    return e;
}

void append_ledger(const std::string& path, const RunLedgerEntry& e) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw FormatError("cannot append to " + path);
    out << to_json_line(e) << '\n';
}

std::vector<RunLedgerEntry> read_ledger(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<RunLedgerEntry> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(from_json_line(line));
    return out;
}

}  // namespace maxdet
