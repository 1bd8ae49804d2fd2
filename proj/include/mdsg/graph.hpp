#pragma once

#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mdsg/types.hpp"

namespace mdsg {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

    int component_count() {
        int c = 0;
        for (int i = 0; i < static_cast<int>(parent_.size()); ++i)
            if (find(i) == i) ++c;
        return c;
    }

    // component label per node, labels are 0..count-1 in order of first occurrence
    std::vector<int> labels() {
        std::vector<int> lab(parent_.size(), -1);
        int next = 0;
        for (int i = 0; i < static_cast<int>(parent_.size()); ++i) {
            int r = find(i);
            if (lab[r] < 0) lab[r] = next++;
            lab[i] = lab[r];
        }
        return lab;
    }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

// Disk-model adjacency: edge iff pairwise distance <= d_tr (boundary inclusive).
inline AdjMatrix build_adjacency(const MatrixX2& positions, double d_tr) {
    const int n = static_cast<int>(positions.rows());
    AdjMatrix adj = AdjMatrix::Zero(n, n);
    const double d2 = d_tr * d_tr;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = positions(i, 0) - positions(j, 0);
            const double dy = positions(i, 1) - positions(j, 1);
            if (dx * dx + dy * dy <= d2) {
                adj(i, j) = 1;
                adj(j, i) = 1;
            }
        }
    }
    return adj;
}

inline int count_subnets_unionfind(const AdjMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency(i, j)) uf.unite(i, j);
    return uf.component_count();
}

inline std::vector<int> component_labels(const AdjMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency(i, j)) uf.unite(i, j);
    return uf.labels();
}

inline Matrix laplacian(const AdjMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    Matrix lap = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        for (int j = 0; j < n; ++j) {
            if (adjacency(i, j)) {
                lap(i, j) = -1.0;
                ++deg;
            }
        }
        lap(i, i) = static_cast<double>(deg);
    }
    return lap;
}

// Sub-net count as the number of (near-)zero Laplacian eigenvalues.
// Default tolerance scales with N since Laplacian norms grow with degree.
inline int count_subnets_spectral(const AdjMatrix& adjacency, double zero_tol = -1.0) {
    const int n = static_cast<int>(adjacency.rows());
    if (n == 0) return 0;
    if (zero_tol < 0) zero_tol = 1e-8 * n;
    Matrix lap = laplacian(adjacency);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(lap, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("count_subnets_spectral: eigensolver did not converge");
    int count = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(solver.eigenvalues()(i)) < zero_tol) ++count;
    return count;
}

constexpr int kUnreachable = std::numeric_limits<int>::max();

// All-pairs hop distances; unreachable pairs hold kUnreachable.
struct HopMatrix {
    Eigen::MatrixXi hops;
    int h_max = 0;  // maximum finite hop count
};

inline HopMatrix compute_hops(const AdjMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    HopMatrix hm;
    hm.hops = Eigen::MatrixXi::Constant(n, n, kUnreachable);
    std::vector<std::vector<int>> nbrs(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (adjacency(i, j)) nbrs[i].push_back(j);
    for (int src = 0; src < n; ++src) {
        hm.hops(src, src) = 0;
        std::queue<int> q;
        q.push(src);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : nbrs[u]) {
                if (hm.hops(src, v) == kUnreachable) {
                    hm.hops(src, v) = hm.hops(src, u) + 1;
                    q.push(v);
                }
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (hm.hops(i, j) != kUnreachable && hm.hops(i, j) > hm.h_max)
                hm.h_max = hm.hops(i, j);
    return hm;
}

}  // namespace mdsg
