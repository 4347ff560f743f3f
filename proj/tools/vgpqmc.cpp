#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vgpqmc/divdiff.hpp"
#include "vgpqmc/errors.hpp"
#include "vgpqmc/expansion.hpp"
#include "vgpqmc/json_io.hpp"
#include "vgpqmc/phase_graph.hpp"
#include "vgpqmc/pmr.hpp"
#include "vgpqmc/sampler.hpp"

using namespace vgpqmc;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kHermiticity = 2, kNotVgp = 3, kBudget = 4, kInternal = 5 };

struct Common {
    std::string input;
    std::string output;
    double tol_phase = kDefaultTolPhase;
    double tol_zero = ModelTolerances{}.zero;
    double tol_herm = ModelTolerances{}.herm;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Thrown with a document to print before exiting nonzero.
struct ExitWithDoc {
    int code;
    Json doc;
};

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

Json parse_doc(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(e.what());
    }
}

void write_output(const std::string& path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
}

Json metadata(const Common& c) {
    return {{"tol_phase", c.tol_phase}, {"tol_zero", c.tol_zero}, {"tol_herm", c.tol_herm},
            {"seed", c.seed}, {"threads", c.threads}};
}

Hamiltonian input_hamiltonian(const Common& c) {
    return load_hamiltonian(parse_doc(read_input(c.input)), ModelTolerances{c.tol_herm, c.tol_zero});
}

Json cmd_analyze(const Common& c, std::size_t max_len, std::size_t max_count) {
    const auto h = input_hamiltonian(c);
    const auto g = build_graph(h, c.tol_zero);
    const auto report = is_vgp(g, c.tol_phase);
    const auto cycles = enumerate_chordless_cycles(g, max_len, max_count);
    std::map<std::size_t, std::size_t> by_len;
    for (const auto& cyc : cycles.cycles) ++by_len[cyc.vertices.size()];
    Json counts = Json::object();
    for (auto [len, n] : by_len) counts[std::to_string(len)] = n;

    Json out = to_json(report);
    out["is_stoquastic"] = is_stoquastic(h, c.tol_zero);
    out["dim"] = h.dim();
    out["edges"] = g.edges().size();
    out["chordless_cycles"] = {{"counts_by_length", counts},
                               {"total", cycles.cycles.size()},
                               {"max_length", max_len},
                               {"max_count", max_count},
                               {"truncated", cycles.truncated}};
    out["metadata"] = metadata(c);
    return out;
}

Json cmd_cure(const Common& c) {
    const auto h = input_hamiltonian(c);
    const auto g = build_graph(h, c.tol_zero);
    const auto report = is_vgp(g, c.tol_phase);
    if (!report.is_vgp) {
        Json doc = to_json(report);
        doc["metadata"] = metadata(c);
        throw ExitWithDoc{kNotVgp, doc};
    }
    const auto theta = cure_phases(g, c.tol_phase);
    const auto cured = apply_rotation(h, theta);
    return {{"theta", theta.theta},
            {"hamiltonian", to_json(cured)},
            {"is_stoquastic", is_stoquastic(cured, 1e-9)},
            {"metadata", metadata(c)}};
}

Json cmd_stoquasticize(const Common& c) {
    Json out = to_json(stoquasticize(input_hamiltonian(c)));
    out["metadata"] = metadata(c);
    return out;
}

Json cmd_generate(const Common& c, const std::string& kind, std::size_t n, double density) {
    Json meta = metadata(c);
    meta["kind"] = kind;
    meta["n"] = n;
    meta["density"] = density;
    Json out;
    if (kind == "stoquastic") {
        out = to_json(generate_stoquastic(n, density, c.seed));
    } else if (kind == "spf") {
        auto gen = generate_spf(n, density, c.seed);
        out = to_json(gen.hamiltonian);
        meta["theta"] = gen.theta.theta;
        meta["stoquastic_by_chance"] = gen.stoquastic_by_chance;
    } else if (kind == "sign_problem") {
        auto gen = generate_sign_problem(n, density, c.seed);
        out = to_json(gen.hamiltonian);
        meta["theta"] = gen.theta.theta;
        meta["perturbed_edge"] = {gen.edge_u, gen.edge_v};
        meta["perturbation"] = gen.perturbation;
        meta["attempts"] = gen.attempts;
    } else {
        throw InvalidArgument("kind must be stoquastic, spf or sign_problem");
    }
    out["metadata"] = meta;
    return out;
}

Json cmd_partition(const Common& c, double beta, double rel_tol, std::uint64_t budget, bool exact) {
    const auto h = input_hamiltonian(c);
    const auto series = partition_function_series(decompose_pmr(h), beta, rel_tol, {budget, c.threads});
    Json out = {{"beta", beta}, {"Z", series.z}, {"q_max", series.q_max_used}, {"tail_bound", series.tail_bound}};
    if (exact) out["Z_exact"] = partition_function_exact(h, beta);
    Json meta = metadata(c);
    meta["rel_tol"] = rel_tol;
    meta["budget"] = budget;
    out["metadata"] = meta;
    return out;
}

std::vector<double> parse_scan(const std::string& text) {
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw InvalidArgument("--scan expects b0:b1:steps");
    double b0 = 0.0, b1 = 0.0;
    long steps = 0;
    try {
        b0 = std::stod(text.substr(0, a));
        b1 = std::stod(text.substr(a + 1, b - a - 1));
        steps = std::stol(text.substr(b + 1));
    } catch (const std::exception&) {
        throw InvalidArgument("--scan expects b0:b1:steps");
    }
    if (steps < 1 || (steps > 1 && !(b1 > b0))) throw InvalidArgument("--scan needs steps >= 1 and b1 > b0");
    std::vector<double> betas;
    for (long i = 0; i < steps; ++i)
        betas.push_back(steps == 1 ? b0 : b0 + (b1 - b0) * static_cast<double>(i) / static_cast<double>(steps - 1));
    return betas;
}

Json cmd_signs(const Common& c, double beta, double rel_tol, std::uint64_t budget, const std::string& scan) {
    const auto pmr = decompose_pmr(input_hamiltonian(c));
    const ExpansionOptions opts{budget, c.threads};
    if (scan.empty()) {
        Json out = to_json(weighted_signs(pmr, beta, rel_tol, opts));
        Json meta = metadata(c);
        meta["rel_tol"] = rel_tol;
        meta["budget"] = budget;
        out["metadata"] = meta;
        return out;
    }
    Json points = Json::array();
    for (const auto& p : sign_decay_scan(pmr, parse_scan(scan), rel_tol, opts))
        points.push_back({{"beta", p.beta}, {"sgn_stoq", p.sgn_stoq}, {"sgn_abs", p.sgn_abs}});
    return points;
}

Json cmd_sample(const Common& c, const std::string& scheme, double beta, std::uint64_t steps,
                std::uint64_t burn_in, unsigned chains) {
    const auto pmr = decompose_pmr(input_hamiltonian(c));
    SamplerOptions opts;
    opts.chains = chains;
    opts.threads = c.threads;
    Json out = to_json(mcmc_weighted_sign(pmr, beta, parse_scheme(scheme), steps, burn_in, c.seed, opts));
    out["beta"] = beta;
    Json meta = metadata(c);
    meta["steps"] = steps;
    meta["burn_in"] = burn_in;
    meta["chains"] = chains;
    out["metadata"] = meta;
    return out;
}

Json cmd_dd(const Common& c) {
    const Json doc = parse_doc(read_input(c.input));
    if (!doc.is_object() || !doc.contains("beta") || !doc.contains("energies"))
        throw ParseError("dd input needs 'beta' and 'energies'");
    if (!doc["beta"].is_number() || !doc["energies"].is_array()) throw ParseError("dd input has the wrong types");
    std::vector<double> energies;
    for (const Json& e : doc["energies"]) {
        if (!e.is_number()) throw ParseError("energies must be numbers");
        energies.push_back(e.get<double>());
    }
    return to_json(divdiff_exp(doc["beta"].get<double>(), energies));
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--input", c.input, "input document (default stdin)");
    sub->add_option("--output", c.output, "output path (default stdout)");
    sub->add_option("--tol-phase", c.tol_phase, "phase tolerance")->capture_default_str();
    sub->add_option("--tol-zero", c.tol_zero, "structural zero threshold")->capture_default_str();
    sub->add_option("--tol-herm", c.tol_herm, "hermiticity tolerance")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sign-problem analysis for Hamiltonians in a fixed basis"};
    app.require_subcommand(1);
    Common c;

    auto* analyze = app.add_subcommand("analyze", "VGP report, stoquasticity and chordless cycles");
    std::size_t max_len = 12, max_count = 100000;
    analyze->add_option("--max-cycle-len", max_len)->capture_default_str();
    analyze->add_option("--max-cycles", max_count)->capture_default_str();

    auto* cure = app.add_subcommand("cure", "diagonal phase rotation making the input stoquastic");
    auto* stoq = app.add_subcommand("stoquasticize", "replace off-diagonals by -|H_ij|");

    auto* generate = app.add_subcommand("generate", "random test instance");
    std::string kind = "spf";
    std::size_t n = 6;
    double density = 0.5;
    generate->add_option("--kind", kind)->check(CLI::IsMember({"stoquastic", "spf", "sign_problem"}))->capture_default_str();
    generate->add_option("--n", n)->capture_default_str();
    generate->add_option("--density", density)->capture_default_str();

    double beta = 1.0, rel_tol = 1e-8;
    std::uint64_t budget = ExpansionOptions{}.budget;
    bool exact = false;
    auto* partition = app.add_subcommand("partition", "partition function by series expansion");
    partition->add_option("--beta", beta)->capture_default_str();
    partition->add_option("--rel-tol", rel_tol)->capture_default_str();
    partition->add_option("--budget", budget)->capture_default_str();
    partition->add_flag("--exact", exact, "also report tr exp(-beta H) by diagonalization");

    std::string scan;
    auto* signs = app.add_subcommand("signs", "weighted signs of the stoquastic and abs schemes");
    signs->add_option("--beta", beta)->capture_default_str();
    signs->add_option("--rel-tol", rel_tol)->capture_default_str();
    signs->add_option("--budget", budget)->capture_default_str();
    signs->add_option("--scan", scan, "b0:b1:steps");

    std::string scheme = "stoq";
    std::uint64_t steps = 100000, burn_in = 10000;
    unsigned chains = 1;
    auto* sample = app.add_subcommand("sample", "Metropolis estimate of a weighted sign");
    sample->add_option("--scheme", scheme)->check(CLI::IsMember({"stoq", "abs"}))->capture_default_str();
    sample->add_option("--beta", beta)->capture_default_str();
    sample->add_option("--steps", steps)->capture_default_str();
    sample->add_option("--burn-in", burn_in)->capture_default_str();
    sample->add_option("--chains", chains)->capture_default_str();

    auto* dd = app.add_subcommand("dd", "divided difference of exp(-beta x)");

    for (auto* sub : app.get_subcommands({})) add_common(sub, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        Json out;
        if (*analyze) out = cmd_analyze(c, max_len, max_count);
        else if (*cure) out = cmd_cure(c);
        else if (*stoq) out = cmd_stoquasticize(c);
        else if (*generate) out = cmd_generate(c, kind, n, density);
        else if (*partition) out = cmd_partition(c, beta, rel_tol, budget, exact);
        else if (*signs) out = cmd_signs(c, beta, rel_tol, budget, scan);
        else if (*sample) out = cmd_sample(c, scheme, beta, steps, burn_in, chains);
        else if (*dd) out = cmd_dd(c);
        write_output(c.output, out);
        return kOk;
    } catch (const ExitWithDoc& e) {
        write_output(c.output, e.doc);
        std::cerr << "error: input is not VGP\n";
        return e.code;
    } catch (const HermiticityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kHermiticity;
    } catch (const NotVgp& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotVgp;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}
