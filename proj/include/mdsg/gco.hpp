#pragma once

#include <utility>
#include <vector>

#include "mdsg/differential.hpp"

namespace mdsg {

inline double adjacency_inf_norm(const AdjMatrix& adjacency) {
    double best = 0.0;
    for (int i = 0; i < adjacency.rows(); ++i) {
        double row = 0.0;
        for (int j = 0; j < adjacency.cols(); ++j) row += adjacency(i, j);
        best = std::max(best, row);
    }
    return best;
}

// The operator (I - eps*L). For 0 < eps <= 1/||A||_inf all entries are
// non-negative and every column sums to 1, making iteration a contraction
// in the row-wise L1 max metric.
struct BipartiteKernel {
    Matrix laplacian;
    double epsilon = 0.0;
    Matrix op;  // I - eps*L, cached

    static BipartiteKernel from_laplacian(Matrix lap, double eps) {
        const int n = static_cast<int>(lap.rows());
        BipartiteKernel k;
        k.op = Matrix::Identity(n, n) - eps * lap;
        k.laplacian = std::move(lap);
        k.epsilon = eps;
        return k;
    }

    static BipartiteKernel from_united(const UnitedMdsg& united) {
        return from_laplacian(united.laplacian_matrix(), united.epsilon);
    }
};

inline Matrix gco_step(const BipartiteKernel& kernel, const Matrix& features) {
    if (features.rows() != kernel.op.rows())
        throw ShapeMismatch("gco_step: feature rows do not match kernel size");
    return kernel.op * features;
}

inline Matrix gco_iterate(const BipartiteKernel& kernel, Matrix features, int iterations) {
    for (int l = 0; l < iterations; ++l) features = gco_step(kernel, features);
    return features;
}

// Row-wise L1 max metric: max_i (|dx_i| + |dy_i|).
inline double rowwise_l1_max(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().rowwise().sum().maxCoeff();
}

struct FixedPointResult {
    Matrix features;
    int iterations = 0;
    bool converged = false;
};

inline FixedPointResult gco_fixed_point(const BipartiteKernel& kernel, Matrix features,
                                        double tol = 1e-9, int l_max = 100000) {
    FixedPointResult res;
    for (int l = 0; l < l_max; ++l) {
        Matrix next = gco_step(kernel, features);
        const double d = rowwise_l1_max(next, features);
        features = std::move(next);
        res.iterations = l + 1;
        if (d < tol) {
            res.converged = true;
            break;
        }
    }
    res.features = std::move(features);
    return res;
}

// Batch size rule: K = floor((H_max + 1) / 2), at least 1.
inline int choose_K(int h_max) {
    if (h_max < 1) throw std::invalid_argument("choose_K: h_max must be >= 1");
    return std::max(1, (h_max + 1) / 2);
}

// United graphs for k = 1..K stitched diagonally into one disconnected graph,
// with the shared feature matrix stacked K times.
struct BatchGraph {
    int batch_k = 0;               // K
    int block_size = 0;            // N
    Matrix features;               // (K*N) x 2
    AdjMatrix adjacency;           // block diagonal
    double epsilon = 0.0;
    std::vector<int> node_order;   // shared across blocks

    Matrix laplacian_matrix() const { return laplacian(adjacency); }

    AdjMatrix block(int k_index) const {  // 0-based block, holds A_d^{k_index+1}
        return adjacency.block(k_index * block_size, k_index * block_size, block_size, block_size);
    }
};

inline BatchGraph build_batch(const std::vector<UnitedMdsg>& united) {
    if (united.empty()) throw std::invalid_argument("build_batch: empty input");
    const int n = united.front().size();
    const int K = static_cast<int>(united.size());
    for (const auto& u : united) {
        if (u.node_order != united.front().node_order)
            throw InconsistentOrder("build_batch: node orders differ across united graphs");
        if (u.epsilon != united.front().epsilon)
            throw InconsistentOrder("build_batch: epsilon differs across united graphs");
    }
    BatchGraph b;
    b.batch_k = K;
    b.block_size = n;
    b.epsilon = united.front().epsilon;
    b.node_order = united.front().node_order;
    b.features.resize(K * n, 2);
    b.adjacency = AdjMatrix::Zero(K * n, K * n);
    for (int k = 0; k < K; ++k) {
        b.features.block(k * n, 0, n, 2) = united[k].feature_positions;
        b.adjacency.block(k * n, k * n, n, n) = united[k].adjacency;
    }
    return b;
}

inline std::vector<UnitedMdsg> build_united_series(const DamageScenario& scenario,
                                                   const Usnet& usnet, const HopMatrix& hops,
                                                   int K) {
    std::vector<UnitedMdsg> out;
    out.reserve(K);
    for (int k = 1; k <= K; ++k) out.push_back(build_united_mdsg(scenario, usnet, hops, k));
    return out;
}

}  // namespace mdsg
