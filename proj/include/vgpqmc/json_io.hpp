#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "vgpqmc/expansion.hpp"
#include "vgpqmc/model.hpp"
#include "vgpqmc/phase_graph.hpp"
#include "vgpqmc/sampler.hpp"
#include "vgpqmc/signed_log.hpp"

namespace vgpqmc {

using Json = nlohmann::json;

// Accepts the dense, sparse and Pauli document forms. Complex numbers are
// [re, im] pairs; a bare number is read as a real value.
// Throws ParseError, HermiticityError, DimensionError.
Hamiltonian load_hamiltonian(const Json& doc, const ModelTolerances& tol = {});
Hamiltonian load_hamiltonian(std::string_view text, const ModelTolerances& tol = {});
Hamiltonian load_hamiltonian_file(const std::string& path, const ModelTolerances& tol = {});

// Sparse document with the diagonal and upper triangle.
Json to_json(const Hamiltonian& h);
Json to_json(const VgpReport& report);
// {"sign", "log_mag", "value"}; value is left out when it over- or underflows.
Json to_json(const SignedLogValue& v);
Json to_json(const SignEstimate& e);
Json to_json(const WeightedSignReport& r);
Json to_json(const Configuration& c);

}  // namespace vgpqmc
