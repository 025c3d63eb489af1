#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "maxdet/bounds.hpp"
#include "maxdet/decompose.hpp"
#include "maxdet/equivalence.hpp"
#include "maxdet/gram_search.hpp"
#include "maxdet/io.hpp"
#include "maxdet/matrix.hpp"
#include "maxdet/pipeline.hpp"
#include "maxdet/rational_forms.hpp"
#include "maxdet/spectrum.hpp"

namespace py = pybind11;
using namespace maxdet;

// Python int <-> mpz_class through the decimal representation; exact at any size.
namespace pybind11::detail {
template <>
struct type_caster<BigInt> {
    PYBIND11_TYPE_CASTER(BigInt, const_name("int"));

    bool load(handle src, bool) {
        if (!src || !PyLong_Check(src.ptr())) return false;
        value = BigInt(py::str(src).cast<std::string>());
        return true;
    }
    static handle cast(const BigInt& v, return_value_policy, handle) {
        return PyLong_FromString(v.get_str().c_str(), nullptr, 10);
    }
};
}  // namespace pybind11::detail

namespace {

using Rows = std::vector<std::vector<BigInt>>;
using SignRows = std::vector<std::vector<int>>;

IntMatrix to_int_matrix(const Rows& rows) {
    const int n = static_cast<int>(rows.size());
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw py::value_error("matrix must be square");
        for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Rows from_int_matrix(const IntMatrix& m) {
    Rows out(m.order(), std::vector<BigInt>(m.order()));
    for (int i = 0; i < m.order(); ++i)
        for (int j = 0; j < m.order(); ++j) out[i][j] = m(i, j);
    return out;
}

SignMatrix to_sign_matrix(const SignRows& rows) {
    const int n = static_cast<int>(rows.size());
    SignMatrix r(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw py::value_error("matrix must be square");
        for (int j = 0; j < n; ++j) {
            if (rows[i][j] != 1 && rows[i][j] != -1) throw py::value_error("entries must be +1 or -1");
            r.set(i, j, rows[i][j]);
        }
    }
    return r;
}

SignRows from_sign_matrix(const SignMatrix& r) {
    SignRows out(r.order(), std::vector<int>(r.order()));
    for (int i = 0; i < r.order(); ++i)
        for (int j = 0; j < r.order(); ++j) out[i][j] = r(i, j);
    return out;
}

// exact rationals cross as fractions.Fraction
py::object to_fraction(const mpq_class& q) {
    static py::object fraction = py::module_::import("fractions").attr("Fraction");
    return fraction(py::cast(BigInt(q.get_num())), py::cast(BigInt(q.get_den())));
}

py::list search(int n, const BigInt& d_min, const std::string& bound, int workers) {
    SearchConfig cfg;
    cfg.n = n;
    cfg.d_min = d_min;
    cfg.bound = parse_bound_policy(bound);
    cfg.workers = workers;
    SearchResult found;
    {
        py::gil_scoped_release release;
        found = search_grams(cfg);
    }
    py::list out;
    for (const auto& c : found.candidates) out.append(py::make_tuple(from_int_matrix(c.m), c.det));
    return out;
}

py::dict decompose(const Rows& g, const Rows& h, const std::string& mode, std::uint64_t node_budget, std::uint64_t seed,
                   int fanout) {
    DecomposeOptions opts;
    opts.node_budget = node_budget;
    auto ctx = GramPairContext::make(to_int_matrix(g), to_int_matrix(h));
    DecompositionOutcome res;
    {
        py::gil_scoped_release release;
        if (mode == "first") res = decompose_first(ctx, opts);
        else if (mode == "all") res = decompose_all(ctx, opts);
        else if (mode == "random") res = decompose_random(ctx, seed, fanout, opts);
        else throw py::value_error("mode must be first, all or random");
    }
    py::list solutions;
    for (const auto& r : res.solutions) solutions.append(from_sign_matrix(r));
    py::dict out;
    out["status"] = to_string(res.status);
    out["solutions"] = solutions;
    out["nodes"] = res.nodes;
    out["max_level"] = res.max_level;
    out["exhaustive"] = res.exhaustive;
    return out;
}

py::dict hm(const Rows& g, const Rows& h, bool reduce_exponents) {
    HmOptions opts;
    opts.reduce_exponents = reduce_exponents;
    auto cert = hm_indecomposability(to_int_matrix(g), to_int_matrix(h), opts);
    py::dict out;
    out["verdict"] = to_string(cert.verdict);
    out["j"] = cert.j;
    out["direction"] = to_string(cert.direction);
    return out;
}

py::dict pipeline(int n, const BigInt& d_min) {
    PipelineOptions opts;
    opts.d_min = d_min;
    PipelineSummary s;
    {
        py::gil_scoped_release release;
        s = run_pipeline(n, opts);
    }
    py::list designs;
    for (const auto& r : s.optimal_classes) designs.append(from_sign_matrix(r));
    py::dict out;
    out["n"] = s.n;
    out["d_min"] = s.d_min;
    out["candidates"] = s.candidates;
    out["pairs"] = s.pairs;
    out["decomposed_pairs"] = s.decomposed_pairs;
    out["decomposable_candidates"] = s.decomposable_candidates;
    out["values"] = std::vector<BigInt>(s.values.begin(), s.values.end());
    out["d_n"] = s.d_n ? py::cast(*s.d_n) : py::none();
    out["optimal_classes"] = designs;
    out["complete"] = s.complete;
    return out;
}

py::dict spectrum(int n) {
    SpectrumResult r;
    {
        py::gil_scoped_release release;
        r = full_spectrum(n);
    }
    std::set<BigInt> values;
    for (const auto& [v, e] : r.values) values.insert(v);
    py::dict out;
    out["values"] = std::vector<BigInt>(values.begin(), values.end());
    out["compressed"] = compress_values(values);
    out["first_gap"] = r.first_gap;
    out["complete_above"] = r.complete_above;
    return out;
}

}  // namespace

PYBIND11_MODULE(_maxdet, m) {
    m.doc() = "Maximal determinants of +-1 matrices: Gram search, decomposition and equivalence";

    m.def("det", [](const Rows& a) { return det_exact(to_int_matrix(a)); }, py::arg("matrix"));
    m.def("gram", [](const SignRows& r) { return from_int_matrix(gram(to_sign_matrix(r))); }, py::arg("design"),
          "R R^T");
    m.def("dual_gram", [](const SignRows& r) { return from_int_matrix(dual_gram(to_sign_matrix(r))); },
          py::arg("design"), "R^T R");
    m.def("scaled_det", [](const SignRows& r) { return scaled_det(to_sign_matrix(r)); }, py::arg("design"),
          "|det R| / 2^(n-1)");
    m.def("parse_int_expr", &parse_int_expr, py::arg("text"));

    m.def("hadamard_bound", [](int n) { return to_fraction(hadamard_bound(n).squared); }, py::arg("n"), "Squared bound.");
    m.def("ehlich_barba_bound", [](int n) { return to_fraction(ehlich_barba_bound(n).squared); }, py::arg("n"),
          "Squared bound, n = 1 (mod 4).");
    m.def("ehlich_bound", [](int n) { return to_fraction(ehlich_bound(n).squared); }, py::arg("n"),
          "Squared bound, n = 3 (mod 4).");

    m.def("search_grams", &search, py::arg("n"), py::arg("d_min"), py::arg("bound") = "auto", py::arg("workers") = 1,
          "Candidate Gram matrices with det >= d_min^2, one per class, as (matrix, det) pairs.");
    m.def("decompose", &decompose, py::arg("g"), py::arg("h"), py::arg("mode") = "first", py::arg("node_budget") = 0,
          py::arg("seed") = 1, py::arg("fanout") = 1, "Designs R with R R^T = G and R^T R = H.");

    m.def("gram_canonical", [](const Rows& g) { return from_int_matrix(gram_canonical(to_int_matrix(g)).canonical); },
          py::arg("g"));
    m.def("hadamard_canonical",
          [](const SignRows& r) { return from_sign_matrix(hadamard_canonical(to_sign_matrix(r)).canonical); },
          py::arg("design"));
    m.def("are_gram_equivalent",
          [](const Rows& a, const Rows& b) { return are_gram_equivalent(to_int_matrix(a), to_int_matrix(b)); },
          py::arg("a"), py::arg("b"));
    m.def("are_hadamard_equivalent",
          [](const SignRows& a, const SignRows& b) {
              return are_hadamard_equivalent(to_sign_matrix(a), to_sign_matrix(b));
          },
          py::arg("a"), py::arg("b"));

    m.def("rationally_equivalent",
          [](const Rows& a, const Rows& b) { return rationally_equivalent(to_int_matrix(a), to_int_matrix(b)); },
          py::arg("a"), py::arg("b"));
    m.def("hm_indecomposability", &hm, py::arg("g"), py::arg("h"), py::arg("reduce_exponents") = true);

    m.def("full_spectrum", &spectrum, py::arg("n"));
    m.def("compress_values", [](const std::vector<BigInt>& v) { return compress_values({v.begin(), v.end()}); },
          py::arg("values"));
    m.def("expand_values",
          [](const std::string& text) {
              auto s = expand_values(text);
              return std::vector<BigInt>(s.begin(), s.end());
          },
          py::arg("text"));
    m.def("pipeline", &pipeline, py::arg("n"), py::arg("d_min") = BigInt(0),
          "Gram search, decomposition and classification; d_min = 0 lowers the threshold from the bound.");

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
}
