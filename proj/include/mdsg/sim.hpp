#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mdsg/usnet.hpp"

namespace mdsg {

struct RecoveryResult {
    double t_rc = 0.0;
    int steps = 0;
    std::vector<int> ns_series;        // sub-net count per step, starting at t0
    std::vector<MatrixX2> trajectory;  // per-step positions, flag-gated
    MatrixX2 final_positions;
    std::string algo_tag;
    int k_used = 0;            // k (APF) or k* (GC), 0 when not applicable
    bool fallback_used = false;
};

// Velocity provider: per-node velocities for the given step, norm <= v_max each.
using VelocityPolicy = std::function<MatrixX2(int step, const MatrixX2& positions)>;

struct SimOptions {
    int max_steps = 1000000;       // hard cap, bug indicator when exceeded
    bool record_trajectory = false;
    std::string algo_tag;
};

// Euler integration at dt with connectivity checked after every position
// update; recovery time therefore quantizes upward by at most dt.
inline RecoveryResult simulate(const MatrixX2& start_positions, const VelocityPolicy& policy,
                               const SwarmConfig& config, const SimOptions& options = {}) {
    RecoveryResult res;
    res.algo_tag = options.algo_tag;
    MatrixX2 pos = start_positions;
    const double speed_cap = config.v_max + 1e-9;

    auto subnets_now = [&](const MatrixX2& p) {
        return count_subnets_unionfind(build_adjacency(p, config.d_tr));
    };

    if (options.record_trajectory) res.trajectory.push_back(pos);
    int ns = subnets_now(pos);
    res.ns_series.push_back(ns);
    int step = 0;
    while (ns > 1) {
        if (step >= options.max_steps)
            throw StepBudgetExceeded("simulate: step budget exceeded for " + options.algo_tag);
        MatrixX2 vel = policy(step, pos);
        if (vel.rows() != pos.rows())
            throw ShapeMismatch("simulate: policy returned wrong velocity count");
        for (int i = 0; i < vel.rows(); ++i)
            if (vel.row(i).norm() > speed_cap)
                throw PolicySpeedViolation("simulate: node speed exceeds v_max");
        pos += config.dt * vel;
        ++step;
        if (options.record_trajectory) res.trajectory.push_back(pos);
        ns = subnets_now(pos);
        res.ns_series.push_back(ns);
    }
    res.steps = step;
    res.t_rc = step * config.dt;
    res.final_positions = std::move(pos);
    return res;
}

// Full speed toward fixed per-node targets, zero velocity after arrival.
// A node within v_max*dt of its target lands exactly on it that step.
inline VelocityPolicy target_policy(const MatrixX2& targets, const SwarmConfig& config) {
    return [targets, v_max = config.v_max, dt = config.dt](int, const MatrixX2& pos) {
        MatrixX2 vel = MatrixX2::Zero(pos.rows(), 2);
        const double reach = v_max * dt;
        for (int i = 0; i < pos.rows(); ++i) {
            Vec2 delta = targets.row(i) - pos.row(i);
            const double dist = delta.norm();
            if (dist < 1e-12) continue;
            if (dist <= reach)
                vel.row(i) = delta / dt;  // lands on target, speed <= v_max
            else
                vel.row(i) = (v_max / dist) * delta;
        }
        return vel;
    };
}

// Direct-centering baseline: every remaining node flies at v_max toward the
// centroid of remaining nodes at t0, stopping on the circle of radius d_tr/2
// around it (or earlier when the graph reconnects).
inline RecoveryResult centering_baseline(const Usnet& usnet, const DamageScenario& scenario,
                                         bool record_trajectory = false) {
    const SwarmConfig& config = usnet.config;
    MatrixX2 start = remaining_positions(usnet, scenario);
    if (start.rows() < 1) throw std::invalid_argument("centering_baseline: no remaining nodes");
    Vec2 centroid = start.colwise().mean();

    MatrixX2 targets(start.rows(), 2);
    const double radius = config.d_tr / 2.0;
    for (int i = 0; i < start.rows(); ++i) {
        Vec2 p = start.row(i);
        Vec2 delta = p - centroid;
        const double dist = delta.norm();
        if (dist <= radius)
            targets.row(i) = p;  // already inside the arrival circle
        else
            targets.row(i) = centroid + (radius / dist) * delta;
    }

    // worst case: farthest node flies all the way to its circle boundary
    double max_dist = 0.0;
    for (int i = 0; i < start.rows(); ++i)
        max_dist = std::max(max_dist, (targets.row(i) - start.row(i)).norm());
    SimOptions options;
    options.algo_tag = "centering";
    options.record_trajectory = record_trajectory;
    options.max_steps =
        static_cast<int>(std::ceil(max_dist / (config.v_max * config.dt) * 1.1)) + 2;

    RecoveryResult res = simulate(start, target_policy(targets, config), config, options);
    res.algo_tag = "centering";
    return res;
}

}  // namespace mdsg
