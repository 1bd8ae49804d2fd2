#pragma once

#include <utility>
#include <vector>

#include "mdsg/sim.hpp"

namespace mdsg {

struct MetricsReport {
    double recovery_time = 0.0;
    double coverage_ratio = 0.0;
    std::vector<std::pair<int, double>> degree_cdf;  // (degree d, P_d)
    int final_subnets = 0;
};

// Union-of-disks area rasterized on a square grid over the deployment area.
// Disk radius is d_tr/2 so any two covered points are mutually connectable.
inline double covered_area(const MatrixX2& positions, double d_tr, double area_width,
                           double area_height, double cell) {
    const double radius = d_tr / 2.0;
    const double r2 = radius * radius;
    const int nx = std::max(1, static_cast<int>(std::ceil(area_width / cell)));
    const int ny = std::max(1, static_cast<int>(std::ceil(area_height / cell)));
    long covered = 0;
    for (int gy = 0; gy < ny; ++gy) {
        const double cy = (gy + 0.5) * cell;
        for (int gx = 0; gx < nx; ++gx) {
            const double cx = (gx + 0.5) * cell;
            for (int i = 0; i < positions.rows(); ++i) {
                const double dx = positions(i, 0) - cx;
                const double dy = positions(i, 1) - cy;
                if (dx * dx + dy * dy <= r2) {
                    ++covered;
                    break;
                }
            }
        }
    }
    return static_cast<double>(covered) * cell * cell;
}

inline double coverage_ratio(const MatrixX2& final_positions, const MatrixX2& original_positions,
                             double d_tr, double area_width, double area_height,
                             double cell = 2.0) {
    const double original = covered_area(original_positions, d_tr, area_width, area_height, cell);
    if (original <= 0.0) return 0.0;
    return covered_area(final_positions, d_tr, area_width, area_height, cell) / original;
}

// P_d = fraction of nodes with degree <= d, for d = 0..max degree.
inline std::vector<std::pair<int, double>> degree_cdf(const RemainedGraph& remained) {
    const int n = static_cast<int>(remained.adjacency.rows());
    std::vector<std::pair<int, double>> cdf;
    if (n == 0) return cdf;
    std::vector<int> degree(n, 0);
    int max_degree = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) degree[i] += remained.adjacency(i, j);
        max_degree = std::max(max_degree, degree[i]);
    }
    std::vector<int> hist(max_degree + 1, 0);
    for (int d : degree) ++hist[d];
    int cum = 0;
    for (int d = 0; d <= max_degree; ++d) {
        cum += hist[d];
        cdf.emplace_back(d, static_cast<double>(cum) / n);
    }
    return cdf;
}

inline MetricsReport recovery_summary(const RecoveryResult& result, const Usnet& usnet,
                                      const DamageScenario& scenario, double cell = 2.0) {
    const SwarmConfig& config = usnet.config;
    MetricsReport report;
    report.recovery_time = result.t_rc;
    report.coverage_ratio = coverage_ratio(result.final_positions, usnet.positions, config.d_tr,
                                           config.area_width, config.area_height, cell);
    RemainedGraph final_graph = build_remained_graph(result.final_positions, config.d_tr);
    report.degree_cdf = degree_cdf(final_graph);
    report.final_subnets = final_graph.subnets();
    (void)scenario;
    return report;
}

}  // namespace mdsg
