#pragma once

#include <vector>

#include "mdsg/usnet.hpp"

namespace mdsg {

// Multi-hop differential sub-graph of one remaining node: the destroyed nodes
// within k pre-damage hops. Hop distances are measured on G(t0), including
// paths through nodes that were later destroyed.
struct Mdsg {
    int owner = -1;  // remaining node id
    int hop_k = 0;
    std::vector<int> destroyed_neighbors;

    bool empty() const { return destroyed_neighbors.empty(); }
};

inline Mdsg build_mdsg(const DamageScenario& scenario, const HopMatrix& hops, int k, int owner) {
    Mdsg m;
    m.owner = owner;
    m.hop_k = k;
    for (int d : scenario.destroyed)
        if (hops.hops(owner, d) != kUnreachable && hops.hops(owner, d) <= k)
            m.destroyed_neighbors.push_back(d);
    return m;
}

// Union of all per-node MDSGs over a fixed node order (remaining first, then
// destroyed). Bipartite: the remaining-remaining and destroyed-destroyed
// blocks are identically zero.
struct UnitedMdsg {
    int hop_k = 0;
    std::vector<int> node_order;  // I_u: remaining ids then destroyed ids
    MatrixX2 feature_positions;   // X_d, pre-damage positions in node_order
    AdjMatrix adjacency;          // A_d^k
    double epsilon = 0.0;         // contraction step, 1/N

    int size() const { return static_cast<int>(node_order.size()); }
    Matrix laplacian_matrix() const { return laplacian(adjacency); }
};

inline UnitedMdsg build_united_mdsg(const DamageScenario& scenario, const Usnet& usnet,
                                    const HopMatrix& hops, int k) {
    const int n = usnet.size();
    const int nr = scenario.n_remaining();
    const int nd = scenario.n_destroyed();
    UnitedMdsg u;
    u.hop_k = k;
    u.node_order.reserve(n);
    u.node_order.insert(u.node_order.end(), scenario.remaining.begin(), scenario.remaining.end());
    u.node_order.insert(u.node_order.end(), scenario.destroyed.begin(), scenario.destroyed.end());
    u.feature_positions.resize(n, 2);
    for (int i = 0; i < n; ++i) u.feature_positions.row(i) = usnet.positions.row(u.node_order[i]);
    u.adjacency = AdjMatrix::Zero(n, n);
    for (int ri = 0; ri < nr; ++ri) {
        const int r = scenario.remaining[ri];
        for (int dj = 0; dj < nd; ++dj) {
            const int d = scenario.destroyed[dj];
            const int h = hops.hops(r, d);
            if (h != kUnreachable && h <= k) {
                u.adjacency(ri, nr + dj) = 1;
                u.adjacency(nr + dj, ri) = 1;
            }
        }
    }
    u.epsilon = 1.0 / static_cast<double>(n);
    return u;
}

}  // namespace mdsg
