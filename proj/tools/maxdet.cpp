// Command-line front end.  Exit codes: 0 success, 2 budget exhausted
// (result incomplete), 1 error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "maxdet/bounds.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/equivalence.hpp"
#include "maxdet/gram_search.hpp"
#include "maxdet/io.hpp"
#include "maxdet/pipeline.hpp"
#include "maxdet/rational_forms.hpp"
#include "maxdet/spectrum.hpp"

using namespace maxdet;

namespace {

constexpr int kOk = 0, kError = 1, kIncomplete = 2;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Ledger {
    std::string path = "maxdet-runs.jsonl";
    bool off = false;

    void add(CLI::App* app, RunLedgerEntry e) const {
        if (off || path.empty()) return;
        for (const auto* opt : app->get_options()) {
            if (opt->get_name() == "--help" || opt->count() == 0) continue;
            std::string v;
            for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
            e.config[opt->get_name()] = v;
        }
        e.command = app->get_name();
        e.config_hash = config_digest(e.config);
        append_ledger(path, e);
    }
};

std::vector<IntMatrix> load_grams(const std::string& path, int* n = nullptr, BigInt* dmin2 = nullptr) {
    std::ifstream probe(path);
    if (!probe) throw FormatError("cannot open " + path);
    std::string first;
    std::getline(probe, first);
    if (first.rfind("maxdet-gram v1", 0) == 0) {
        auto file = read_candidates_file(path);
        if (n) *n = file.n;
        if (dmin2) *dmin2 = file.dmin2;
        std::vector<IntMatrix> out;
        for (auto& c : file.candidates) out.push_back(std::move(c.m));
        return out;
    }
    auto list = parse_matrix_file(path);
    if (list.signs) throw FormatError(path + ": expected integer matrices");
    if (n && !list.int_matrices.empty()) *n = list.int_matrices.front().order();
    return list.int_matrices;
}

CandidateFile load_candidate_file(const std::string& path) {
    int n = 0;
    BigInt dmin2 = 1;
    auto grams = load_grams(path, &n, &dmin2);
    CandidateFile file{n, dmin2, {}};
    for (auto& g : grams) {
        BigInt d = det_exact(g);
        file.candidates.push_back({std::move(g), d});
    }
    return file;
}

std::vector<SignMatrix> load_designs(const std::string& path) {
    auto list = parse_matrix_file(path);
    if (!list.signs && list.size()) throw FormatError(path + ": expected +/- rows");
    return list.sign_matrices;
}

void print_bound(const char* name, const BoundValue& b) {
    std::cout << std::left << std::setw(14) << name << " D^2=" << to_string(b.squared) << "  D~" << std::setprecision(10) << b.value()
              << "  D/2^(n-1)~" << b.scaled() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact search for maximal-determinant sign matrices of odd order"};
    app.require_subcommand(1);
    Ledger ledger;
    app.add_option("--ledger", ledger.path, "run ledger (JSON lines) appended by long-running commands");
    app.add_flag("--no-ledger", ledger.off, "do not append to the run ledger");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "upper bounds on D_n");
    int b_n = 0;
    bounds->add_option("--n", b_n, "order")->required()->check(CLI::PositiveNumber);

    // gram-search
    auto* gs = app.add_subcommand("gram-search", "enumerate candidate Gram matrices up to equivalence");
    int gs_n = 0, gs_split = 0, gs_workers = 0, gs_unit = -1, gs_units = 1;
    std::string gs_dmin = "1", gs_bound = "auto", gs_out, gs_ckpt;
    gs->add_option("--n", gs_n, "odd order")->required();
    gs->add_option("--dmin", gs_dmin, "determinant threshold, e.g. 2173*2^12");
    gs->add_option("--bound", gs_bound, "none|km|sharper|partition|auto");
    gs->add_option("--out", gs_out, "candidate file to write");
    gs->add_option("--checkpoint", gs_ckpt, "checkpoint file; resumes if present");
    gs->add_option("--split-depth", gs_split, "frontier depth for work units (0: automatic)");
    gs->add_option("--unit", gs_unit, "run only work-unit index i of --units");
    gs->add_option("--units", gs_units, "number of work units when --unit is given");
    gs->add_option("--workers", gs_workers, "threads (default MAXDET_WORKERS or all cores)");

    // decompose
    auto* dc = app.add_subcommand("decompose", "find sign matrices with given Gram and dual Gram matrices");
    std::string dc_grams, dc_mode = "first", dc_out;
    std::uint64_t dc_nodes = 0, dc_seed = 1;
    double dc_seconds = 0;
    int dc_fanout = 1;
    bool dc_fix_sign = false;
    std::vector<std::size_t> dc_pair;
    dc->add_option("--grams", dc_grams, "candidate file")->required();
    dc->add_option("--mode", dc_mode, "first|all|random")->check(CLI::IsMember({"first", "all", "random"}));
    dc->add_option("--pair", dc_pair, "only this pair of candidate indices")->expected(2);
    dc->add_option("--nodes", dc_nodes, "node budget per pair (0: unlimited)");
    dc->add_option("--seconds", dc_seconds, "time budget per pair (0: unlimited)");
    dc->add_option("--seed", dc_seed, "seed for --mode random");
    dc->add_option("--fanout", dc_fanout, "children sampled per node in --mode random");
    dc->add_flag("--fix-sign", dc_fix_sign, "report only one of R and -R");
    dc->add_option("--out", dc_out, "solution file to write");

    // hasse
    auto* hs = app.add_subcommand("hasse", "Hasse-Minkowski indecomposability certificates");
    std::string hs_grams, hs_pairs = "same-charpoly";
    hs->add_option("--grams", hs_grams, "candidate file")->required();
    hs->add_option("--pairs", hs_pairs, "all|same-charpoly")->check(CLI::IsMember({"all", "same-charpoly"}));

    // canon
    auto* cn = app.add_subcommand("canon", "canonical forms and class counts");
    std::string cn_grams, cn_designs, cn_out;
    auto* cn_g = cn->add_option("--grams", cn_grams, "Gram/candidate file");
    auto* cn_d = cn->add_option("--designs", cn_designs, "design file");
    cn_g->excludes(cn_d);
    cn->add_option("--out", cn_out, "write one canonical representative per class");

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "determinant spectrum of odd order n");
    int sp_n = 0, sp_max = 13;
    std::string sp_dmin, sp_out;
    std::uint64_t sp_steps = 0, sp_seed = 1, sp_nodes = 0;
    sp->add_option("--n", sp_n, "odd order")->required();
    sp->add_option("--dmin", sp_dmin, "only the exhaustive part above this determinant");
    sp->add_option("--steps", sp_steps, "local search moves (0: automatic)");
    sp->add_option("--seed", sp_seed, "local search seed");
    sp->add_option("--nodes", sp_nodes, "decomposition node budget per pair");
    sp->add_option("--max-order", sp_max, "largest n accepted for a full spectrum");
    sp->add_option("--out", sp_out, "witness file to write (one design per value)");

    // pipeline
    auto* pl = app.add_subcommand("pipeline", "search, decompose, classify");
    int pl_n = 0;
    std::string pl_dmin, pl_grams, pl_out;
    std::uint64_t pl_nodes = 0, pl_all_nodes = 0;
    bool pl_no_hasse = false;
    pl->add_option("--n", pl_n, "odd order");
    pl->add_option("--dmin", pl_dmin, "threshold (default: lowered from the bound)");
    pl->add_option("--grams", pl_grams, "use this candidate file instead of searching");
    pl->add_option("--nodes", pl_nodes, "decomposition node budget per pair");
    pl->add_option("--classify-nodes", pl_all_nodes, "node budget for enumerating optimal designs");
    pl->add_flag("--no-hasse", pl_no_hasse, "skip Hasse-Minkowski on failed pairs");
    pl->add_option("--out", pl_out, "write optimal design class representatives");

    // verify
    auto* vf = app.add_subcommand("verify", "check a candidate file");
    std::string vf_grams, vf_dmin;
    int vf_n = 0;
    vf->add_option("--grams", vf_grams, "candidate file")->required();
    vf->add_option("--n", vf_n, "order (default: from the file)");
    vf->add_option("--dmin", vf_dmin, "threshold (default: from the file header)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto t0 = Clock::now();

        if (*bounds) {
            std::cout << "n=" << b_n << '\n';
            print_bound("hadamard", hadamard_bound(b_n));
            if (b_n % 2 == 1 && b_n > 1) print_bound("ehlich-barba", ehlich_barba_bound(b_n));
            if (b_n % 4 == 3) print_bound("ehlich", ehlich_bound(b_n));
            return kOk;
        }

        if (*gs) {
            SearchConfig cfg;
            cfg.n = gs_n;
            cfg.d_min = parse_int_expr(gs_dmin);
            cfg.bound = parse_bound_policy(gs_bound);
            cfg.checkpoint_path = gs_ckpt;
            cfg.split_depth = gs_split;
            cfg.workers = gs_workers;
            if (gs_unit >= 0) {
                cfg.subtree_index = gs_unit;
                cfg.subtree_count = gs_units;
            }
            SearchResult res = search_grams(cfg);
            CandidateFile file{gs_n, cfg.d_min * cfg.d_min, res.candidates};
            if (!gs_out.empty()) write_candidates_file(gs_out, file);
            std::set<BigInt> dets;
            for (const auto& c : res.candidates) dets.insert(c.det);
            std::cout << "n=" << gs_n << " dmin=" << cfg.d_min.get_str() << " classes=" << res.candidates.size()
                      << " distinct_dets=" << dets.size() << " nodes=" << res.stats.nodes << " seconds=" << res.stats.seconds << '\n';
            std::cout << "nodes_per_level";
            for (auto v : res.stats.nodes_per_level) std::cout << ' ' << v;
            std::cout << '\n';
            RunLedgerEntry e;
            e.nodes = res.stats.nodes;
            e.seconds = since(t0);
            if (!gs_out.empty()) e.outputs[gs_out] = sha256_file(gs_out);
            ledger.add(gs, e);
            return kOk;
        }

        if (*dc) {
            auto grams = load_grams(dc_grams);
            std::vector<CandidatePair> pairs;
            if (dc_pair.size() == 2) {
                if (dc_pair[0] >= grams.size() || dc_pair[1] >= grams.size()) throw std::out_of_range("--pair index out of range");
                pairs.push_back({std::min(dc_pair[0], dc_pair[1]), std::max(dc_pair[0], dc_pair[1])});
            } else {
                pairs = enumerate_pairs(grams);
            }
            DecomposeOptions opts{dc_nodes, dc_seconds, dc_fix_sign};
            SolutionFile sols{grams.empty() ? 0 : grams.front().order(), {}};
            std::size_t decomposed = 0, timeouts = 0;
            std::uint64_t nodes = 0;
            std::set<std::size_t> decomposable;
            for (const auto& p : pairs) {
                auto ctx = GramPairContext::make(grams[p.first], grams[p.second]);
                DecompositionOutcome out = dc_mode == "all"      ? decompose_all(ctx, opts)
                                           : dc_mode == "random" ? decompose_random(ctx, dc_seed, dc_fanout, opts)
                                                                 : decompose_first(ctx, opts);
                nodes += out.nodes;
                std::cout << "pair " << p.first << ' ' << p.second << ' ' << to_string(out.status) << " solutions=" << out.solutions.size()
                          << " nodes=" << out.nodes << " max_level=" << out.max_level << '\n';
                if (out.status == DecompositionStatus::timeout) ++timeouts;
                if (out.status == DecompositionStatus::solutions) {
                    ++decomposed;
                    decomposable.insert(p.first);
                    decomposable.insert(p.second);
                }
                for (auto& r : out.solutions) sols.designs.push_back(std::move(r));
            }
            std::cout << "pairs=" << pairs.size() << " decomposed_pairs=" << decomposed << " decomposable_candidates=" << decomposable.size()
                      << " timeouts=" << timeouts << " solutions=" << sols.designs.size() << '\n';
            RunLedgerEntry e;
            e.inputs[dc_grams] = sha256_file(dc_grams);
            e.nodes = nodes;
            e.seconds = since(t0);
            e.complete = timeouts == 0;
            if (!dc_out.empty()) {
                write_solutions_file(dc_out, sols);
                e.outputs[dc_out] = sha256_file(dc_out);
            }
            ledger.add(dc, e);
            return timeouts ? kIncomplete : kOk;
        }

        if (*hs) {
            auto grams = load_grams(hs_grams);
            std::vector<CandidatePair> pairs;
            if (hs_pairs == "all") {
                for (std::size_t i = 0; i < grams.size(); ++i)
                    for (std::size_t j = i; j < grams.size(); ++j) pairs.push_back({i, j});
            } else {
                pairs = enumerate_pairs(grams);
            }
            std::map<std::string, std::size_t> tally;
            for (const auto& p : pairs) {
                std::string verdict;
                if (!(char_poly(grams[p.first]) == char_poly(grams[p.second]))) {
                    verdict = "charpoly-differs";
                } else {
                    auto cert = hm_indecomposability(grams[p.first], grams[p.second]);
                    verdict = to_string(cert.verdict);
                    if (cert.verdict != HmVerdict::inconclusive) verdict += " j=" + std::to_string(cert.j) + " " + to_string(cert.direction);
                }
                std::cout << "pair " << p.first << ' ' << p.second << ' ' << verdict << '\n';
                ++tally[verdict.substr(0, verdict.find(' '))];
            }
            std::cout << "pairs=" << pairs.size();
            for (const auto& [k, v] : tally) std::cout << ' ' << k << '=' << v;
            std::cout << '\n';
            return tally.count("unfactored") ? kIncomplete : kOk;
        }

        if (*cn) {
            if (!cn_grams.empty()) {
                auto grams = load_grams(cn_grams);
                auto cls = gram_classes(grams);
                std::cout << "matrices=" << grams.size() << " classes=" << cls.representatives.size() << '\n';
                if (!cn_out.empty()) {
                    MatrixList list;
                    for (auto idx : cls.representatives) list.int_matrices.push_back(gram_canonical(grams[idx]).canonical);
                    std::ofstream out(cn_out);
                    write_matrix_text(out, list);
                }
            } else if (!cn_designs.empty()) {
                auto designs = load_designs(cn_designs);
                auto cls = hadamard_classes(designs);
                std::vector<std::size_t> sizes(cls.representatives.size());
                for (auto c : cls.class_of) ++sizes[c];
                std::cout << "designs=" << designs.size() << " classes=" << cls.representatives.size() << " sizes=";
                for (std::size_t k = 0; k < sizes.size(); ++k) std::cout << (k ? "," : "") << sizes[k];
                std::cout << '\n';
                if (!cn_out.empty()) {
                    MatrixList list;
                    list.signs = true;
                    for (auto idx : cls.representatives) list.sign_matrices.push_back(hadamard_canonical(designs[idx]).canonical);
                    std::ofstream out(cn_out);
                    write_matrix_text(out, list);
                }
            } else {
                throw std::invalid_argument("canon needs --grams or --designs");
            }
            return kOk;
        }

        if (*sp) {
            std::map<BigInt, SignMatrix> witnesses;
            bool complete = true;
            SpectrumAboveOptions above;
            above.decompose.node_budget = sp_nodes;
            if (!sp_dmin.empty()) {
                auto res = spectrum_above(sp_n, parse_int_expr(sp_dmin), above);
                witnesses = res.values;
                complete = res.complete;
                std::set<BigInt> vals;
                for (const auto& kv : res.values) vals.insert(kv.first);
                std::cout << "n=" << sp_n << " candidates=" << res.candidates << " pairs=" << res.pairs << " values=" << vals.size();
                if (!vals.empty()) std::cout << " min=" << vals.begin()->get_str() << " max=" << vals.rbegin()->get_str();
                std::cout << " complete=" << complete << '\n' << compress_values(vals) << '\n';
            } else {
                FullSpectrumOptions opts;
                opts.climb.steps = sp_steps;
                opts.climb.seed = sp_seed;
                opts.above = above;
                opts.max_order = sp_max;
                auto res = full_spectrum(sp_n, opts);
                complete = res.complete_above;
                std::set<BigInt> vals;
                for (const auto& [v, entry] : res.values) {
                    vals.insert(v);
                    witnesses.emplace(v, entry.witness);
                }
                std::cout << "n=" << sp_n << " values=" << vals.size() << " first_gap=" << res.first_gap.get_str() << " complete_above=" << complete
                          << '\n' << "S_" << sp_n << " = {" << compress_values(vals) << "}\n";
            }
            RunLedgerEntry e;
            e.seconds = since(t0);
            e.complete = complete;
            if (!sp_out.empty()) {
                SolutionFile f{sp_n, {}};
                for (const auto& kv : witnesses) f.designs.push_back(kv.second);
                write_solutions_file(sp_out, f);
                e.outputs[sp_out] = sha256_file(sp_out);
            }
            ledger.add(sp, e);
            return complete ? kOk : kIncomplete;
        }

        if (*pl) {
            PipelineOptions opts;
            opts.decompose.node_budget = pl_nodes;
            opts.classify.node_budget = pl_all_nodes;
            opts.run_hasse = !pl_no_hasse;
            PipelineSummary s;
            RunLedgerEntry e;
            if (!pl_grams.empty()) {
                s = run_pipeline_on(load_candidate_file(pl_grams), opts);
                e.inputs[pl_grams] = sha256_file(pl_grams);
            } else {
                if (pl_n <= 0) throw std::invalid_argument("pipeline needs --n or --grams");
                if (!pl_dmin.empty()) opts.d_min = parse_int_expr(pl_dmin);
                s = run_pipeline(pl_n, opts);
            }
            std::cout << "n=" << s.n << " dmin=" << s.d_min.get_str() << " candidates=" << s.candidates << " pairs=" << s.pairs
                      << " decomposed_pairs=" << s.decomposed_pairs << " decomposable_candidates=" << s.decomposable_candidates
                      << " timeouts=" << s.timeouts << " hasse_ruled_out=" << s.hm_ruled_out << " hasse_inconclusive=" << s.hm_inconclusive << '\n';
            std::cout << "values " << compress_values(s.values) << '\n';
            if (s.d_n) {
                std::cout << "D_" << s.n << '=' << s.d_n->get_str() << " optimal_raw=" << s.optimal_raw << " optimal_classes=" << s.optimal_classes.size() << '\n';
            } else {
                std::cout << "D_" << s.n << " not determined\n";
            }
            e.nodes = s.search_nodes + s.decompose_nodes;
            e.seconds = since(t0);
            e.complete = s.complete;
            if (!pl_out.empty()) {
                write_solutions_file(pl_out, SolutionFile{s.n, s.optimal_classes});
                e.outputs[pl_out] = sha256_file(pl_out);
            }
            ledger.add(pl, e);
            return s.complete ? kOk : kIncomplete;
        }

        if (*vf) {
            int n = 0;
            BigInt dmin2 = 1;
            auto grams = load_grams(vf_grams, &n, &dmin2);
            if (vf_n) n = vf_n;
            BigInt d_min;
            if (!vf_dmin.empty()) d_min = parse_int_expr(vf_dmin);
            else is_square(dmin2, &d_min);
            auto report = verify_candidates(grams, n, d_min);
            for (std::size_t i = 0; i < report.checks.size(); ++i)
                if (!report.checks[i].ok()) std::cout << "matrix " << i << " fails " << report.checks[i].failures() << '\n';
            std::cout << "matrices=" << grams.size() << " passed=" << report.passed << " classes=" << report.classes
                      << " distinct_dets=" << report.dets.size() << (report.ok() ? " ok" : " FAILED") << '\n';
            return report.ok() ? kOk : kError;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kError;
    }
    return kOk;
}
