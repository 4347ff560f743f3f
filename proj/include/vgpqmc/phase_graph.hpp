#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vgpqmc/model.hpp"

namespace vgpqmc {

inline constexpr double kDefaultTolPhase = 1e-8;

// Reduces an angle to (-pi, pi].
double wrap_phase(double x) noexcept;

// Undirected edge {u, v}, u < v, with H_vu = -r e^{-i phi}: phi is the phase
// picked up when a walk steps from u to v. Stepping v -> u contributes -phi.
struct PhaseEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double r = 0.0;
    double phi = 0.0;
};

class PhaseGraph {
public:
    struct Neighbor {
        std::size_t vertex;
        std::size_t edge;
    };

    PhaseGraph(std::vector<double> energies, std::vector<PhaseEdge> edges);

    std::size_t num_vertices() const noexcept { return energies_.size(); }
    const std::vector<double>& energies() const noexcept { return energies_; }
    const std::vector<PhaseEdge>& edges() const noexcept { return edges_; }
    // Neighbors sorted by vertex index.
    const std::vector<Neighbor>& neighbors(std::size_t v) const { return adj_.at(v); }

    bool has_edge(std::size_t a, std::size_t b) const { return find_edge(a, b).has_value(); }
    std::optional<std::size_t> find_edge(std::size_t a, std::size_t b) const;
    // Phase of the step a -> b; nullopt when no edge joins them.
    std::optional<double> oriented_phase(std::size_t a, std::size_t b) const;

private:
    std::vector<double> energies_;
    std::vector<PhaseEdge> edges_;
    std::vector<std::vector<Neighbor>> adj_;
};

struct Cycle {
    std::vector<std::size_t> vertices;  // closing edge back to vertices.front() implied
    double phase = 0.0;                 // in (-pi, pi]
};

struct PhaseRotation {
    std::vector<double> theta;  // in (-pi, pi]
};

// BFS spanning forest. Each component is rooted at its lowest-index vertex with
// potential 0; a tree edge a -> b sets theta[b] = theta[a] + phase(a -> b).
struct SpanningForest {
    std::vector<std::size_t> parent;        // kNoParent for roots
    std::vector<std::size_t> component;     // component id per vertex
    std::vector<double> theta;
    std::vector<std::size_t> non_tree_edges;
    std::size_t num_components = 0;
    static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
};

struct VgpReport {
    bool is_vgp = true;
    std::size_t components = 0;
    std::vector<Cycle> violations;  // fundamental cycles with nonvanishing phase
    std::optional<PhaseRotation> rotation;
};

struct ChordlessCycles {
    std::vector<Cycle> cycles;  // sorted by (length, vertices)
    bool truncated = false;
};

PhaseGraph build_graph(const Hamiltonian& h, double tol_zero = 1e-12);

SpanningForest spanning_forest(const PhaseGraph& g);

// Residual phase(a -> b) + theta[a] - theta[b] of an edge, wrapped. Zero on tree edges.
double edge_residual(const PhaseGraph& g, const SpanningForest& forest, std::size_t edge);

// Fundamental cycle closed by a non-tree edge: the edge u -> v followed by the
// tree path from v back to u.
Cycle fundamental_cycle(const PhaseGraph& g, const SpanningForest& forest, std::size_t edge);

VgpReport is_vgp(const PhaseGraph& g, double tol_phase = kDefaultTolPhase);

// Sum of oriented edge phases around a closed vertex sequence. Throws MissingEdge.
double cycle_phase(const PhaseGraph& g, std::span<const std::size_t> vertices);

ChordlessCycles enumerate_chordless_cycles(const PhaseGraph& g, std::size_t max_len = 12,
                                           std::size_t max_count = 100000);

// Rotation theta with phase(a -> b) + theta[a] - theta[b] = 0 mod 2pi on every
// edge, so apply_rotation(h, theta) is stoquastic. Throws NotVgp.
PhaseRotation cure_phases(const PhaseGraph& g, double tol_phase = kDefaultTolPhase);

// H'_ij = H_ij e^{i(theta_i - theta_j)}.
Hamiltonian apply_rotation(const Hamiltonian& h, const PhaseRotation& theta);

Hamiltonian generate_stoquastic(std::size_t n, double density, std::uint64_t seed);

struct GeneratedSpf {
    Hamiltonian hamiltonian;
    PhaseRotation theta;  // hamiltonian == apply_rotation(stoquastic source, theta)
    bool stoquastic_by_chance = false;
};

GeneratedSpf generate_spf(std::size_t n, double density, std::uint64_t seed);

struct GeneratedSignProblem {
    Hamiltonian hamiltonian;
    PhaseRotation theta;
    std::size_t edge_u = 0;
    std::size_t edge_v = 0;
    double perturbation = 0.0;  // extra phase on H_{vu}, drawn from (pi/4, pi)
    std::size_t attempts = 1;
};

// A VGP instance with one cycle-carrying edge twisted by a phase in (pi/4, pi).
GeneratedSignProblem generate_sign_problem(std::size_t n, double density, std::uint64_t seed);

// Smallest m in [1, m_max] with cos(m x) < 0.
std::optional<std::uint64_t> first_negative_cos_multiple(double x, std::uint64_t m_max);

}  // namespace vgpqmc
