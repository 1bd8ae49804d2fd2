#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdsg {

using Matrix = Eigen::MatrixXd;
using MatrixX2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using AdjMatrix = Eigen::MatrixXi;  // dense 0/1, symmetric, zero diagonal
using Vec2 = Eigen::Vector2d;

// 2D node position in meters.
struct Position {
    double x = 0.0;
    double y = 0.0;

    Vec2 vec() const { return Vec2(x, y); }
    static Position from(const Vec2& v) { return {v.x(), v.y()}; }
};

inline double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct SwarmConfig {
    int n_total = 200;            // N
    double area_width = 1000.0;   // meters
    double area_height = 1000.0;  // meters
    double d_tr = 120.0;          // transmission range, meters
    double v_max = 10.0;          // meters/second
    double dt = 0.1;              // seconds per step
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (n_total < 2) throw std::invalid_argument("SwarmConfig: n_total must be >= 2");
        if (d_tr <= 0) throw std::invalid_argument("SwarmConfig: d_tr must be > 0");
        if (v_max <= 0) throw std::invalid_argument("SwarmConfig: v_max must be > 0");
        if (dt <= 0) throw std::invalid_argument("SwarmConfig: dt must be > 0");
        if (area_width <= 0 || area_height <= 0)
            throw std::invalid_argument("SwarmConfig: area must be positive");
    }
};

struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EigenFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyMdsg : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoDamage : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InconsistentOrder : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConnectedCandidate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PolicySpeedViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonTermination : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mdsg
