#pragma once

#include <vector>

#include "mdsg/differential.hpp"
#include "mdsg/sim.hpp"

namespace mdsg {

// Closed-form potential-field solution at t0. Velocities are held constant
// for the whole recovery flight.
struct ApfSolution {
    int hop_k = 0;
    Vec2 damage_centroid = Vec2::Zero();          // p_a
    std::vector<Vec2> mdsg_centroids;             // p_{d,r_i}, zero when MDSG empty
    std::vector<bool> mdsg_empty;
    std::vector<double> alphas;                   // differential weights
    MatrixX2 raw_velocities;                      // v_{r_i}(t0)
    MatrixX2 scaled_velocities;                   // v_hat, max speed = v_max
    double scale_factor = 0.0;                    // v_max / max_j ||v_j||, 0 when all zero
};

// Arithmetic mean of the t0 positions of the destroyed neighbors.
inline Vec2 mdsg_centroid(const Mdsg& mdsg, const Usnet& usnet) {
    if (mdsg.empty()) throw EmptyMdsg("mdsg_centroid: MDSG has no destroyed neighbors");
    Vec2 sum = Vec2::Zero();
    for (int d : mdsg.destroyed_neighbors) sum += usnet.positions.row(d).transpose();
    return sum / static_cast<double>(mdsg.destroyed_neighbors.size());
}

inline Vec2 damage_centroid(const DamageScenario& scenario, const Usnet& usnet) {
    if (scenario.destroyed.empty()) throw NoDamage("damage_centroid: no destroyed nodes");
    Vec2 sum = Vec2::Zero();
    for (int d : scenario.destroyed) sum += usnet.positions.row(d).transpose();
    return sum / static_cast<double>(scenario.destroyed.size());
}

// v = alpha*(p_d - p) + (p_a - p), with alpha = d_tr / (2*||p_d - p||), so the
// differential term has norm exactly d_tr/2. Degenerate cases (empty MDSG, or
// the node sitting on its MDSG centroid) drop the differential term.
inline ApfSolution apf_velocities(const DamageScenario& scenario, const Usnet& usnet,
                                  const HopMatrix& hops, int k, double v_max) {
    if (scenario.destroyed.empty()) throw NoDamage("apf_velocities: no destroyed nodes");
    if (k < 1) throw std::invalid_argument("apf_velocities: k must be >= 1");
    const int nr = scenario.n_remaining();
    ApfSolution sol;
    sol.hop_k = k;
    sol.damage_centroid = damage_centroid(scenario, usnet);
    sol.mdsg_centroids.resize(nr, Vec2::Zero());
    sol.mdsg_empty.resize(nr, true);
    sol.alphas.resize(nr, 0.0);
    sol.raw_velocities.resize(nr, 2);

    const double d_tr = usnet.config.d_tr;
    for (int i = 0; i < nr; ++i) {
        const int r = scenario.remaining[i];
        const Vec2 p = usnet.positions.row(r).transpose();
        Vec2 diff_term = Vec2::Zero();
        Mdsg m = build_mdsg(scenario, hops, k, r);
        if (!m.empty()) {
            const Vec2 pd = mdsg_centroid(m, usnet);
            sol.mdsg_centroids[i] = pd;
            sol.mdsg_empty[i] = false;
            const double dist = (pd - p).norm();
            if (dist > 1e-12) {
                sol.alphas[i] = d_tr / (2.0 * dist);
                diff_term = sol.alphas[i] * (pd - p);
            }
        }
        sol.raw_velocities.row(i) = (diff_term + (sol.damage_centroid - p)).transpose();
    }

    double max_norm = 0.0;
    for (int i = 0; i < nr; ++i)
        max_norm = std::max(max_norm, sol.raw_velocities.row(i).norm());
    if (max_norm > 0.0) {
        sol.scale_factor = v_max / max_norm;
        sol.scaled_velocities = sol.scale_factor * sol.raw_velocities;
    } else {
        sol.scale_factor = 0.0;
        sol.scaled_velocities = sol.raw_velocities;  // all zero
    }
    return sol;
}

// Worst-case recovery time: farthest node flies to the arrival circle.
inline double apf_upper_bound(const DamageScenario& scenario, const Usnet& usnet) {
    if (scenario.destroyed.empty()) throw NoDamage("apf_upper_bound: no destroyed nodes");
    const Vec2 pa = damage_centroid(scenario, usnet);
    double max_dist = 0.0;
    for (int r : scenario.remaining)
        max_dist = std::max(max_dist, (pa - usnet.positions.row(r).transpose()).norm());
    return (max_dist + usnet.config.d_tr / 2.0) / usnet.config.v_max;
}

// Constant-velocity flight until the remained graph reconnects. Exceeding the
// theoretical bound (plus one discretization step) is an implementation bug.
inline RecoveryResult apf_recover(const Usnet& usnet, const DamageScenario& scenario, int k,
                                  bool record_trajectory = false) {
    const SwarmConfig& config = usnet.config;
    MatrixX2 start = remaining_positions(usnet, scenario);
    HopMatrix hops = compute_hops(usnet.adjacency);
    ApfSolution sol = apf_velocities(scenario, usnet, hops, k, config.v_max);

    SimOptions options;
    options.algo_tag = "apf";
    options.record_trajectory = record_trajectory;
    options.max_steps =
        static_cast<int>(std::ceil(apf_upper_bound(scenario, usnet) / config.dt)) + 1;

    MatrixX2 vel = sol.scaled_velocities;
    RecoveryResult res;
    try {
        res = simulate(start, [vel](int, const MatrixX2&) { return vel; }, config, options);
    } catch (const StepBudgetExceeded& e) {
        throw NonTermination(e.what());
    }
    res.algo_tag = "apf";
    res.k_used = k;
    return res;
}

}  // namespace mdsg
