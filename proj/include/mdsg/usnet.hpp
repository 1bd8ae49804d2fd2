#pragma once

#include <algorithm>
#include <vector>

#include "mdsg/graph.hpp"
#include "mdsg/rng.hpp"
#include "mdsg/types.hpp"

namespace mdsg {

// Pre-damage swarm network. Immutable after construction.
struct Usnet {
    SwarmConfig config;
    MatrixX2 positions;   // X(t0), N x 2
    AdjMatrix adjacency;  // disk-model adjacency at t0

    int size() const { return static_cast<int>(positions.rows()); }
};

// Seeded rejection sampling: regenerate all N positions until the disk graph
// comes out connected. Caps at 10,000 attempts, which signals that the node
// density is too low for d_tr.
inline Usnet generate_usnet(const SwarmConfig& config) {
    config.validate();
    Rng rng(config.rng_seed);
    const int n = config.n_total;
    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        MatrixX2 pos(n, 2);
        for (int i = 0; i < n; ++i) {
            pos(i, 0) = rng.uniform(0.0, config.area_width);
            pos(i, 1) = rng.uniform(0.0, config.area_height);
        }
        AdjMatrix adj = build_adjacency(pos, config.d_tr);
        if (count_subnets_unionfind(adj) == 1)
            return Usnet{config, std::move(pos), std::move(adj)};
    }
    throw GenerationFailed("generate_usnet: no connected layout within 10000 attempts");
}

// Single-instant partition of node indices at t0 into destroyed/remaining.
struct DamageScenario {
    double t0 = 0.0;
    std::vector<int> destroyed;  // I_D, ordered
    std::vector<int> remaining;  // I_R, ordered

    int n_destroyed() const { return static_cast<int>(destroyed.size()); }
    int n_remaining() const { return static_cast<int>(remaining.size()); }

    void validate(int n_total) const {
        std::vector<char> seen(n_total, 0);
        for (int d : destroyed) {
            if (d < 0 || d >= n_total || seen[d])
                throw std::invalid_argument("DamageScenario: bad destroyed id");
            seen[d] = 1;
        }
        for (int r : remaining) {
            if (r < 0 || r >= n_total || seen[r])
                throw std::invalid_argument("DamageScenario: id in both sets or duplicated");
            seen[r] = 1;
        }
        if (n_destroyed() + n_remaining() != n_total)
            throw std::invalid_argument("DamageScenario: partition does not cover all nodes");
    }
};

// Uniform damage draw without replacement, deterministic per seed.
inline DamageScenario make_damage_scenario(int n_total, int n_destroyed, std::uint64_t seed,
                                           double t0 = 0.0) {
    if (n_destroyed < 0 || n_destroyed >= n_total)
        throw std::invalid_argument("make_damage_scenario: need 0 <= N_D < N");
    std::vector<int> ids(n_total);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    // partial Fisher-Yates: first n_destroyed entries become the damage set
    for (int i = 0; i < n_destroyed; ++i) {
        int j = i + static_cast<int>(rng.uniform_index(n_total - i));
        std::swap(ids[i], ids[j]);
    }
    DamageScenario s;
    s.t0 = t0;
    s.destroyed.assign(ids.begin(), ids.begin() + n_destroyed);
    s.remaining.assign(ids.begin() + n_destroyed, ids.end());
    std::sort(s.destroyed.begin(), s.destroyed.end());
    std::sort(s.remaining.begin(), s.remaining.end());
    return s;
}

// Sub-graph induced by surviving nodes at given positions.
struct RemainedGraph {
    MatrixX2 positions;   // X_R, N_R x 2
    AdjMatrix adjacency;  // A_R

    Matrix laplacian_matrix() const { return laplacian(adjacency); }
    int subnets() const { return count_subnets_unionfind(adjacency); }
};

inline MatrixX2 remaining_positions(const Usnet& usnet, const DamageScenario& scenario) {
    MatrixX2 pos(scenario.n_remaining(), 2);
    for (int i = 0; i < scenario.n_remaining(); ++i)
        pos.row(i) = usnet.positions.row(scenario.remaining[i]);
    return pos;
}

inline RemainedGraph build_remained_graph(const MatrixX2& positions, double d_tr) {
    return RemainedGraph{positions, build_adjacency(positions, d_tr)};
}

inline RemainedGraph build_remained_graph(const Usnet& usnet, const DamageScenario& scenario) {
    return build_remained_graph(remaining_positions(usnet, scenario), usnet.config.d_tr);
}

}  // namespace mdsg
