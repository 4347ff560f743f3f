#include "vgpqmc/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vgpqmc/errors.hpp"

namespace vgpqmc {

namespace {

const Json& field(const Json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

double read_real(const Json& j) {
    if (!j.is_number()) throw ParseError("expected a number");
    return j.get<double>();
}

std::size_t read_index(const Json& j) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
    throw ParseError("expected a nonnegative integer");
}

Amplitude read_complex(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {read_real(j[0]), read_real(j[1])};
    throw ParseError("expected a number or an [re, im] pair");
}

Hamiltonian load_dense(const Json& doc, const ModelTolerances& tol) {
    const Json& m = field(doc, "matrix");
    if (!m.is_array()) throw ParseError("'matrix' must be an array of rows");
    std::vector<std::vector<Amplitude>> rows;
    for (const Json& row : m) {
        if (!row.is_array()) throw ParseError("'matrix' rows must be arrays");
        if (row.size() != m.size()) throw DimensionError("dense matrix is not square");
        auto& out = rows.emplace_back();
        for (const Json& x : row) out.push_back(read_complex(x));
    }
    return from_dense(rows, tol);
}

Hamiltonian load_sparse(const Json& doc, const ModelTolerances& tol) {
    const std::size_t dim = read_index(field(doc, "dim"));
    const Json& list = field(doc, "entries");
    if (!list.is_array()) throw ParseError("'entries' must be an array");
    std::vector<MatrixEntry> entries;
    for (const Json& e : list) {
        if (!e.is_array() || (e.size() != 3 && e.size() != 4))
            throw ParseError("sparse entries are [i, j, re, im]");
        const double im = e.size() == 4 ? read_real(e[3]) : 0.0;
        entries.push_back({read_index(e[0]), read_index(e[1]), {read_real(e[2]), im}});
    }
    return from_sparse(dim, entries, tol);
}

Hamiltonian load_pauli(const Json& doc, const ModelTolerances& tol) {
    const std::size_t n = read_index(field(doc, "n_qubits"));
    const Json& list = field(doc, "terms");
    if (!list.is_array()) throw ParseError("'terms' must be an array");
    std::vector<PauliTerm> terms;
    for (const Json& t : list) {
        if (!t.is_object()) throw ParseError("Pauli terms are objects");
        const Json& word = field(t, "word");
        if (!word.is_string()) throw ParseError("'word' must be a string");
        terms.push_back({read_complex(field(t, "coeff")), word.get<std::string>()});
    }
    return from_pauli(n, terms, tol);
}

}  // namespace

Hamiltonian load_hamiltonian(const Json& doc, const ModelTolerances& tol) {
    if (!doc.is_object()) throw ParseError("document must be a JSON object");
    const Json& format = field(doc, "format");
    if (!format.is_string()) throw ParseError("'format' must be a string");
    const auto f = format.get<std::string>();
    if (f == "dense") return load_dense(doc, tol);
    if (f == "sparse") return load_sparse(doc, tol);
    if (f == "pauli") return load_pauli(doc, tol);
    throw ParseError("unknown format '" + f + "'");
}

Hamiltonian load_hamiltonian(std::string_view text, const ModelTolerances& tol) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(e.what());
    }
    return load_hamiltonian(doc, tol);
}

Hamiltonian load_hamiltonian_file(const std::string& path, const ModelTolerances& tol) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_hamiltonian(std::string_view(buf.str()), tol);
}

Json to_json(const Hamiltonian& h) {
    Json entries = Json::array();
    for (std::size_t z = 0; z < h.dim(); ++z)
        if (h.energy(z) != 0.0) entries.push_back({z, z, h.energy(z), 0.0});
    for (const auto& e : h.off_diagonal())
        if (e.row < e.col) entries.push_back({e.row, e.col, e.value.real(), e.value.imag()});
    std::sort(entries.begin(), entries.end());
    return {{"format", "sparse"}, {"dim", h.dim()}, {"entries", entries}};
}

Json to_json(const VgpReport& report) {
    Json violations = Json::array();
    for (const auto& c : report.violations) violations.push_back({{"cycle", c.vertices}, {"phase", c.phase}});
    Json out = {{"is_vgp", report.is_vgp}, {"components", report.components}, {"violations", violations}};
    out["theta"] = report.rotation ? Json(report.rotation->theta) : Json(nullptr);
    return out;
}

Json to_json(const SignedLogValue& v) {
    Json out = {{"sign", v.sign()}, {"log_mag", v.is_zero() ? Json(nullptr) : Json(v.log_mag())}};
    const double x = v.to_double();
    if (v.is_zero() || (std::isfinite(x) && x != 0.0)) out["value"] = x;
    return out;
}

Json to_json(const SignEstimate& e) {
    return {{"scheme", to_string(e.scheme)},
            {"mean", e.mean},
            {"std_error", e.std_error},
            {"n_samples", e.n_samples},
            {"acceptance_rate", e.acceptance_rate}};
}

Json to_json(const WeightedSignReport& r) {
    return {{"beta", r.beta},
            {"Z", r.z_true.to_double()},
            {"q_max", r.q_max},
            {"tail_bound", r.tail_bound},
            {"sgn_stoq", r.sgn_stoq},
            {"sgn_abs", r.sgn_abs},
            {"Z_true", to_json(r.z_true)},
            {"Z_stoq", to_json(r.z_stoq)},
            {"Z_abs", to_json(r.z_abs)}};
}

Json to_json(const Configuration& c) { return {{"z", c.z}, {"seq", c.seq}}; }

}  // namespace vgpqmc
