#include "vgpqmc/phase_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <string>

#include "vgpqmc/errors.hpp"

namespace vgpqmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double wrap_phase(double x) noexcept {
    double r = std::remainder(x, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    if (r > kPi) r -= kTwoPi;
    return r;
}

PhaseGraph::PhaseGraph(std::vector<double> energies, std::vector<PhaseEdge> edges)
    : energies_(std::move(energies)), edges_(std::move(edges)) {
    const std::size_t n = energies_.size();
    std::sort(edges_.begin(), edges_.end(),
              [](const PhaseEdge& a, const PhaseEdge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    adj_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (edge.u >= edge.v || edge.v >= n) throw DimensionError("phase graph edge must satisfy u < v < n");
        if (e > 0 && edges_[e - 1].u == edge.u && edges_[e - 1].v == edge.v)
            throw DimensionError("duplicate phase graph edge");
        adj_[edge.u].push_back({edge.v, e});
        adj_[edge.v].push_back({edge.u, e});
    }
    for (auto& list : adj_)
        std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
}

std::optional<std::size_t> PhaseGraph::find_edge(std::size_t a, std::size_t b) const {
    const auto& list = adj_.at(a);
    auto it = std::lower_bound(list.begin(), list.end(), b,
                               [](const Neighbor& nb, std::size_t key) { return nb.vertex < key; });
    if (it != list.end() && it->vertex == b) return it->edge;
    return std::nullopt;
}

std::optional<double> PhaseGraph::oriented_phase(std::size_t a, std::size_t b) const {
    const auto e = find_edge(a, b);
    if (!e) return std::nullopt;
    const double phi = edges_[*e].phi;
    return a < b ? phi : -phi;
}

PhaseGraph build_graph(const Hamiltonian& h, double tol_zero) {
    std::vector<PhaseEdge> edges;
    for (const auto& e : h.off_diagonal()) {
        if (e.row >= e.col) continue;
        const double r = std::abs(e.value);
        if (r <= tol_zero) continue;
        // H_uv = -r e^{i phi}, equivalently H_vu = -r e^{-i phi}.
        const Amplitude minus = -e.value;
        edges.push_back({e.row, e.col, r, wrap_phase(std::atan2(minus.imag(), minus.real()))});
    }
    return PhaseGraph(h.energies(), std::move(edges));
}

SpanningForest spanning_forest(const PhaseGraph& g) {
    const std::size_t n = g.num_vertices();
    SpanningForest f;
    f.parent.assign(n, SpanningForest::kNoParent);
    f.component.assign(n, SpanningForest::kNoParent);
    f.theta.assign(n, 0.0);
    std::vector<std::size_t> parent_edge(n, SpanningForest::kNoParent);

    for (std::size_t root = 0; root < n; ++root) {
        if (f.component[root] != SpanningForest::kNoParent) continue;
        const std::size_t comp = f.num_components++;
        f.component[root] = comp;
        std::queue<std::size_t> queue;
        queue.push(root);
        while (!queue.empty()) {
            const std::size_t a = queue.front();
            queue.pop();
            for (const auto& nb : g.neighbors(a)) {
                if (f.component[nb.vertex] != SpanningForest::kNoParent) continue;
                f.component[nb.vertex] = comp;
                f.parent[nb.vertex] = a;
                parent_edge[nb.vertex] = nb.edge;
                f.theta[nb.vertex] = wrap_phase(f.theta[a] + *g.oriented_phase(a, nb.vertex));
                queue.push(nb.vertex);
            }
        }
    }
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const auto& edge = g.edges()[e];
        if (parent_edge[edge.u] != e && parent_edge[edge.v] != e) f.non_tree_edges.push_back(e);
    }
    return f;
}

double edge_residual(const PhaseGraph& g, const SpanningForest& forest, std::size_t edge) {
    const auto& e = g.edges().at(edge);
    return wrap_phase(e.phi + forest.theta[e.u] - forest.theta[e.v]);
}

Cycle fundamental_cycle(const PhaseGraph& g, const SpanningForest& forest, std::size_t edge) {
    const auto& e = g.edges().at(edge);
    auto path_to_root = [&forest](std::size_t v) {
        std::vector<std::size_t> path{v};
        while (forest.parent[path.back()] != SpanningForest::kNoParent) path.push_back(forest.parent[path.back()]);
        return path;
    };
    auto up_u = path_to_root(e.u);
    auto up_v = path_to_root(e.v);
    // Strip the shared ancestry, keeping the lowest common ancestor on up_v.
    while (up_u.size() >= 2 && up_v.size() >= 2 && up_u[up_u.size() - 2] == up_v[up_v.size() - 2]) {
        up_u.pop_back();
        up_v.pop_back();
    }
    up_u.pop_back();
    if (up_v.back() == e.u) up_v.pop_back();

    Cycle c;
    c.vertices.push_back(e.u);
    c.vertices.insert(c.vertices.end(), up_v.begin(), up_v.end());
    for (auto it = up_u.rbegin(); it != up_u.rend(); ++it)
        if (*it != e.u) c.vertices.push_back(*it);
    c.phase = cycle_phase(g, c.vertices);
    return c;
}

VgpReport is_vgp(const PhaseGraph& g, double tol_phase) {
    const auto forest = spanning_forest(g);
    VgpReport report;
    report.components = forest.num_components;
    for (std::size_t e : forest.non_tree_edges) {
        if (std::abs(edge_residual(g, forest, e)) <= tol_phase) continue;
        report.violations.push_back(fundamental_cycle(g, forest, e));
    }
    report.is_vgp = report.violations.empty();
    if (report.is_vgp) report.rotation = PhaseRotation{forest.theta};
    return report;
}

double cycle_phase(const PhaseGraph& g, std::span<const std::size_t> vertices) {
    if (vertices.size() < 2) throw MissingEdge("a cycle needs at least two vertices");
    double total = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const std::size_t a = vertices[k];
        const std::size_t b = vertices[(k + 1) % vertices.size()];
        if (a >= g.num_vertices() || b >= g.num_vertices())
            throw MissingEdge("cycle vertex out of range");
        const auto phi = g.oriented_phase(a, b);
        if (!phi) throw MissingEdge("no edge between " + std::to_string(a) + " and " + std::to_string(b));
        total += *phi;
    }
    return wrap_phase(total);
}

namespace {

class ChordlessSearch {
public:
    ChordlessSearch(const PhaseGraph& g, std::size_t max_len, std::size_t max_count)
        : g_(g), max_len_(max_len), max_count_(max_count), on_path_(g.num_vertices(), false) {}

    ChordlessCycles run() {
        for (std::size_t start = 0; start < g_.num_vertices() && !out_.truncated; ++start) {
            path_ = {start};
            on_path_[start] = true;
            extend();
            on_path_[start] = false;
        }
        std::sort(out_.cycles.begin(), out_.cycles.end(), [](const Cycle& a, const Cycle& b) {
            if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
            return a.vertices < b.vertices;
        });
        return std::move(out_);
    }

private:
    // Path v0 .. vk is induced and only vk may neighbor v0 among v2..vk (then it closes).
    void extend() {
        const std::size_t v0 = path_.front();
        const std::size_t vk = path_.back();
        for (const auto& nb : g_.neighbors(vk)) {
            const std::size_t w = nb.vertex;
            if (w <= v0 || on_path_[w]) continue;
            bool chord = false;
            for (std::size_t i = 1; i + 1 < path_.size() && !chord; ++i) chord = g_.has_edge(path_[i], w);
            if (chord) continue;

            if (path_.size() >= 2 && g_.has_edge(v0, w)) {
                if (path_[1] < w && path_.size() + 1 <= max_len_) emit(w);
                if (out_.truncated) return;
                continue;
            }
            if (path_.size() + 1 >= max_len_) continue;
            path_.push_back(w);
            on_path_[w] = true;
            extend();
            on_path_[w] = false;
            path_.pop_back();
            if (out_.truncated) return;
        }
    }

    void emit(std::size_t last) {
        if (out_.cycles.size() >= max_count_) {
            out_.truncated = true;
            return;
        }
        Cycle c;
        c.vertices = path_;
        c.vertices.push_back(last);
        c.phase = cycle_phase(g_, c.vertices);
        out_.cycles.push_back(std::move(c));
    }

    const PhaseGraph& g_;
    std::size_t max_len_;
    std::size_t max_count_;
    std::vector<bool> on_path_;
    std::vector<std::size_t> path_;
    ChordlessCycles out_;
};

}  // namespace

ChordlessCycles enumerate_chordless_cycles(const PhaseGraph& g, std::size_t max_len, std::size_t max_count) {
    if (max_len < 3) throw InvalidArgument("max_len must be at least 3");
    return ChordlessSearch(g, max_len, max_count).run();
}

PhaseRotation cure_phases(const PhaseGraph& g, double tol_phase) {
    auto report = is_vgp(g, tol_phase);
    if (!report.is_vgp) {
        const auto& c = report.violations.front();
        throw NotVgp("fundamental cycle of length " + std::to_string(c.vertices.size()) + " has phase " +
                     std::to_string(c.phase));
    }
    return std::move(*report.rotation);
}

Hamiltonian apply_rotation(const Hamiltonian& h, const PhaseRotation& theta) {
    if (theta.theta.size() != h.dim())
        throw DimensionError("rotation has " + std::to_string(theta.theta.size()) + " phases for dimension " +
                             std::to_string(h.dim()));
    std::vector<MatrixEntry> entries;
    entries.reserve(h.off_diagonal().size() + h.dim());
    for (std::size_t z = 0; z < h.dim(); ++z) entries.push_back({z, z, h.energy(z)});
    for (const auto& e : h.off_diagonal())
        entries.push_back({e.row, e.col, e.value * std::polar(1.0, theta.theta[e.row] - theta.theta[e.col])});
    return Hamiltonian(h.dim(), entries, {}, h.origin());
}

namespace {

void check_generator_args(std::size_t n, double density) {
    if (n < 2) throw InvalidArgument("generator needs n >= 2");
    if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("density must lie in (0, 1]");
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

PhaseRotation draw_rotation(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    PhaseRotation theta;
    theta.theta.resize(n);
    for (auto& t : theta.theta) t = -angle(rng);  // (-pi, pi]
    return theta;
}

}  // namespace

Hamiltonian generate_stoquastic(std::size_t n, double density, std::uint64_t seed) {
    check_generator_args(n, density);
    auto rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> diag(-1.0, 1.0);
    std::uniform_real_distribution<double> hop(-1.0, 0.0);

    std::vector<MatrixEntry> entries;
    for (std::size_t z = 0; z < n; ++z) entries.push_back({z, z, diag(rng)});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (unit(rng) >= density) continue;
            const double v = hop(rng);
            entries.push_back({i, j, v});
            entries.push_back({j, i, v});
        }
    return Hamiltonian(n, entries);
}

GeneratedSpf generate_spf(std::size_t n, double density, std::uint64_t seed) {
    auto base = generate_stoquastic(n, density, seed);
    auto rng = make_rng(seed, 1);
    auto theta = draw_rotation(n, rng);
    auto h = apply_rotation(base, theta);
    const bool stoq = is_stoquastic(h, 1e-12);
    return {std::move(h), std::move(theta), stoq};
}

GeneratedSignProblem generate_sign_problem(std::size_t n, double density, std::uint64_t seed) {
    check_generator_args(n, density);
    if (n < 3) throw InvalidArgument("a sign-problem instance needs a cycle, so n >= 3");
    constexpr std::size_t kMaxAttempts = 1000;
    for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::uint64_t sub_seed = attempt == 0 ? seed : seed + 0x9E3779B97F4A7C15ULL * attempt;
        auto spf = generate_spf(n, density, sub_seed);
        const auto g = build_graph(spf.hamiltonian);
        const auto forest = spanning_forest(g);
        if (forest.non_tree_edges.empty()) continue;

        auto rng = make_rng(sub_seed, 2);
        std::uniform_int_distribution<std::size_t> pick(0, forest.non_tree_edges.size() - 1);
        const auto& edge = g.edges()[forest.non_tree_edges[pick(rng)]];
        const double delta = std::uniform_real_distribution<double>(kPi / 4.0, kPi)(rng);

        std::vector<MatrixEntry> entries;
        const auto& h = spf.hamiltonian;
        for (std::size_t z = 0; z < h.dim(); ++z) entries.push_back({z, z, h.energy(z)});
        for (const auto& e : h.off_diagonal()) {
            Amplitude v = e.value;
            // Raising phi_uv by delta multiplies H_uv by e^{i delta}.
            if (e.row == edge.u && e.col == edge.v) v *= std::polar(1.0, delta);
            if (e.row == edge.v && e.col == edge.u) v *= std::polar(1.0, -delta);
            entries.push_back({e.row, e.col, v});
        }
        return {Hamiltonian(h.dim(), entries), std::move(spf.theta), edge.u, edge.v, delta, attempt + 1};
    }
    throw InvalidArgument("could not draw a graph with a cycle; raise n or density");
}

std::optional<std::uint64_t> first_negative_cos_multiple(double x, std::uint64_t m_max) {
    if (m_max < 1) throw InvalidArgument("m_max must be at least 1");
    for (std::uint64_t m = 1; m <= m_max; ++m)
        if (std::cos(static_cast<double>(m) * x) < 0.0) return m;
    return std::nullopt;
}

}  // namespace vgpqmc
