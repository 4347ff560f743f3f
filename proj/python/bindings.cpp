#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vgpqmc/divdiff.hpp"
#include "vgpqmc/errors.hpp"
#include "vgpqmc/expansion.hpp"
#include "vgpqmc/json_io.hpp"
#include "vgpqmc/phase_graph.hpp"
#include "vgpqmc/pmr.hpp"
#include "vgpqmc/sampler.hpp"

namespace py = pybind11;
using namespace vgpqmc;

namespace {

std::vector<std::vector<Amplitude>> to_dense(const Hamiltonian& h) {
    std::vector<std::vector<Amplitude>> m(h.dim(), std::vector<Amplitude>(h.dim()));
    for (std::size_t z = 0; z < h.dim(); ++z) m[z][z] = h.energy(z);
    for (const auto& e : h.off_diagonal()) m[e.row][e.col] = e.value;
    return m;
}

py::tuple signed_log(const SignedLogValue& v) { return py::make_tuple(v.sign(), v.log_mag()); }

}  // namespace

PYBIND11_MODULE(_vgpqmc, m) {
    m.doc() = "VGP analysis, curing and partition-function expansions";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<HermiticityError>(m, "HermiticityError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<MissingEdge>(m, "MissingEdge", base.ptr());
    py::register_exception<NotVgp>(m, "NotVgp", base.ptr());
    py::register_exception<NearDegenerate>(m, "NearDegenerate", base.ptr());
    py::register_exception<NotClosed>(m, "NotClosed", base.ptr());
    py::register_exception<UndefinedStep>(m, "UndefinedStep", base.ptr());
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base.ptr());
    py::register_exception<ZeroWeightTrap>(m, "ZeroWeightTrap", base.ptr());

    py::class_<Hamiltonian>(m, "Hamiltonian")
        .def_property_readonly("dim", &Hamiltonian::dim)
        .def_property_readonly("energies", &Hamiltonian::energies)
        .def("entry", &Hamiltonian::entry, py::arg("row"), py::arg("col"))
        .def("to_dense", &to_dense)
        .def("to_json", [](const Hamiltonian& h) { return to_json(h).dump(); });

    m.def("load_hamiltonian",
          [](const std::string& text, double tol_herm, double tol_zero) {
              return load_hamiltonian(std::string_view(text), ModelTolerances{tol_herm, tol_zero});
          },
          py::arg("document"), py::arg("tol_herm") = 1e-10, py::arg("tol_zero") = 1e-12);
    m.def("from_dense",
          [](const std::vector<std::vector<Amplitude>>& rows, double tol_herm, double tol_zero) {
              return from_dense(rows, ModelTolerances{tol_herm, tol_zero});
          },
          py::arg("matrix"), py::arg("tol_herm") = 1e-10, py::arg("tol_zero") = 1e-12);
    m.def("from_pauli",
          [](std::size_t n_qubits, const std::vector<std::pair<Amplitude, std::string>>& terms) {
              std::vector<PauliTerm> t;
              for (const auto& [c, w] : terms) t.push_back({c, w});
              return from_pauli(n_qubits, t);
          },
          py::arg("n_qubits"), py::arg("terms"));
    m.def("is_stoquastic", &is_stoquastic, py::arg("h"), py::arg("tol") = 1e-12);
    m.def("stoquasticize", &stoquasticize);

    py::class_<PmrForm>(m, "PmrForm")
        .def_property_readonly("dim", &PmrForm::dim)
        .def_property_readonly("num_terms", &PmrForm::num_terms)
        .def_property_readonly("energies", &PmrForm::energies)
        .def("term", [](const PmrForm& p, std::size_t j) {
            const auto& t = p.terms().at(j);
            std::vector<long long> image;
            for (auto z : t.image) image.push_back(z == kNoImage ? -1 : static_cast<long long>(z));
            return py::make_tuple(image, t.coeff);
        });
    m.def("decompose_pmr", &decompose_pmr);
    m.def("recompose", &recompose);

    py::class_<Cycle>(m, "Cycle")
        .def_readonly("vertices", &Cycle::vertices)
        .def_readonly("phase", &Cycle::phase);
    py::class_<VgpReport>(m, "VgpReport")
        .def_readonly("is_vgp", &VgpReport::is_vgp)
        .def_readonly("components", &VgpReport::components)
        .def_readonly("violations", &VgpReport::violations)
        .def_property_readonly("theta", [](const VgpReport& r) -> py::object {
            if (!r.rotation) return py::none();
            return py::cast(r.rotation->theta);
        });

    m.def("is_vgp",
          [](const Hamiltonian& h, double tol_phase, double tol_zero) { return is_vgp(build_graph(h, tol_zero), tol_phase); },
          py::arg("h"), py::arg("tol_phase") = kDefaultTolPhase, py::arg("tol_zero") = 1e-12);
    m.def("chordless_cycles",
          [](const Hamiltonian& h, std::size_t max_len, std::size_t max_count) {
              auto c = enumerate_chordless_cycles(build_graph(h), max_len, max_count);
              return py::make_tuple(c.cycles, c.truncated);
          },
          py::arg("h"), py::arg("max_len") = 12, py::arg("max_count") = 100000);
    m.def("cure_phases",
          [](const Hamiltonian& h, double tol_phase) { return cure_phases(build_graph(h), tol_phase).theta; },
          py::arg("h"), py::arg("tol_phase") = kDefaultTolPhase);
    m.def("apply_rotation",
          [](const Hamiltonian& h, const std::vector<double>& theta) { return apply_rotation(h, PhaseRotation{theta}); },
          py::arg("h"), py::arg("theta"));
    m.def("generate_stoquastic", &generate_stoquastic, py::arg("n"), py::arg("density"), py::arg("seed"));
    m.def("generate_spf",
          [](std::size_t n, double density, std::uint64_t seed) {
              auto g = generate_spf(n, density, seed);
              return py::make_tuple(g.hamiltonian, g.theta.theta);
          },
          py::arg("n"), py::arg("density"), py::arg("seed"));
    m.def("generate_sign_problem",
          [](std::size_t n, double density, std::uint64_t seed) {
              auto g = generate_sign_problem(n, density, seed);
              return py::make_tuple(g.hamiltonian, py::make_tuple(g.edge_u, g.edge_v), g.perturbation);
          },
          py::arg("n"), py::arg("density"), py::arg("seed"));
    m.def("first_negative_cos_multiple", &first_negative_cos_multiple, py::arg("x"), py::arg("m_max"));

    m.def("divdiff_exp",
          [](double beta, const std::vector<double>& energies) { return signed_log(divdiff_exp(beta, energies)); },
          py::arg("beta"), py::arg("energies"));

    m.def("partition_function_series",
          [](const PmrForm& p, double beta, double rel_tol, std::uint64_t budget, unsigned threads) {
              auto s = partition_function_series(p, beta, rel_tol, {budget, threads});
              return py::dict(py::arg("Z") = s.z, py::arg("q_max") = s.q_max_used, py::arg("tail_bound") = s.tail_bound);
          },
          py::arg("pmr"), py::arg("beta"), py::arg("rel_tol") = 1e-8, py::arg("budget") = ExpansionOptions{}.budget,
          py::arg("threads") = 1);
    m.def("partition_function_exact", &partition_function_exact, py::arg("h"), py::arg("beta"),
          py::arg("dim_cap") = kOracleDimCap);

    auto report_dict = [](const WeightedSignReport& r) {
        return py::dict(py::arg("beta") = r.beta, py::arg("q_max") = r.q_max, py::arg("Z") = r.z_true.to_double(),
                        py::arg("Z_stoq") = r.z_stoq.to_double(), py::arg("Z_abs") = r.z_abs.to_double(),
                        py::arg("sgn_stoq") = r.sgn_stoq, py::arg("sgn_abs") = r.sgn_abs,
                        py::arg("tail_bound") = r.tail_bound);
    };
    m.def("weighted_signs",
          [report_dict](const PmrForm& p, double beta, double rel_tol, unsigned threads) {
              return report_dict(weighted_signs(p, beta, rel_tol, {ExpansionOptions{}.budget, threads}));
          },
          py::arg("pmr"), py::arg("beta"), py::arg("rel_tol") = 1e-8, py::arg("threads") = 1);
    m.def("weighted_signs_truncated",
          [report_dict](const PmrForm& p, double beta, std::size_t q_max) {
              return report_dict(weighted_signs_truncated(p, beta, q_max));
          },
          py::arg("pmr"), py::arg("beta"), py::arg("q_max"));
    m.def("sign_decay_scan",
          [](const PmrForm& p, const std::vector<double>& betas, double rel_tol) {
              py::list out;
              for (const auto& s : sign_decay_scan(p, betas, rel_tol)) out.append(py::make_tuple(s.beta, s.sgn_stoq, s.sgn_abs));
              return out;
          },
          py::arg("pmr"), py::arg("betas"), py::arg("rel_tol") = 1e-8);

    m.def("mcmc_weighted_sign",
          [](const PmrForm& p, double beta, const std::string& scheme, std::uint64_t steps, std::uint64_t burn_in,
             std::uint64_t seed, unsigned chains) {
              SamplerOptions opts;
              opts.chains = chains;
              SignEstimate e;
              {
                  py::gil_scoped_release release;
                  e = mcmc_weighted_sign(p, beta, parse_scheme(scheme), steps, burn_in, seed, opts);
              }
              return py::dict(py::arg("scheme") = scheme, py::arg("mean") = e.mean, py::arg("std_error") = e.std_error,
                              py::arg("n_samples") = e.n_samples, py::arg("acceptance_rate") = e.acceptance_rate);
          },
          py::arg("pmr"), py::arg("beta"), py::arg("scheme"), py::arg("steps"), py::arg("burn_in"), py::arg("seed"),
          py::arg("chains") = 1);
    m.def("exact_chain_check",
          [](const PmrForm& p, double beta, const std::string& scheme, std::size_t q_cap, std::uint64_t steps,
             std::uint64_t seed) { return exact_chain_check(p, beta, parse_scheme(scheme), q_cap, steps, seed); },
          py::arg("pmr"), py::arg("beta"), py::arg("scheme"), py::arg("q_cap"), py::arg("steps"), py::arg("seed"));
}
