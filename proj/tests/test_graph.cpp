#include <doctest.h>

#include "mdsg/graph.hpp"
#include "mdsg/rng.hpp"

using namespace mdsg;

namespace {

MatrixX2 random_positions(Rng& rng, int n, double w, double h) {
    MatrixX2 pos(n, 2);
    for (int i = 0; i < n; ++i) {
        pos(i, 0) = rng.uniform(0.0, w);
        pos(i, 1) = rng.uniform(0.0, h);
    }
    return pos;
}

}  // namespace

TEST_CASE("build_adjacency applies the <= boundary rule") {
    MatrixX2 pos(2, 2);
    pos << 0.0, 0.0, 120.0, 0.0;
    AdjMatrix adj = build_adjacency(pos, 120.0);
    CHECK(adj(0, 1) == 1);
    CHECK(adj(1, 0) == 1);
    CHECK(adj(0, 0) == 0);

    pos(1, 0) = 120.1;
    adj = build_adjacency(pos, 120.0);
    CHECK(adj(0, 1) == 0);
}

TEST_CASE("build_adjacency matches pairwise-distance brute force") {
    Rng rng(42);
    MatrixX2 pos = random_positions(rng, 5, 300.0, 300.0);
    AdjMatrix adj = build_adjacency(pos, 120.0);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double dist = (pos.row(i) - pos.row(j)).norm();
            const int expected = (i != j && dist <= 120.0) ? 1 : 0;
            CHECK(adj(i, j) == expected);
        }
    }
}

TEST_CASE("count_subnets_unionfind on simple graphs") {
    AdjMatrix triangle(3, 3);
    triangle << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    CHECK(count_subnets_unionfind(triangle) == 1);

    AdjMatrix isolated = AdjMatrix::Zero(3, 3);
    CHECK(count_subnets_unionfind(isolated) == 3);
}

TEST_CASE("count_subnets_spectral on simple graphs") {
    // path of 4 nodes
    AdjMatrix path = AdjMatrix::Zero(4, 4);
    path(0, 1) = path(1, 0) = 1;
    path(1, 2) = path(2, 1) = 1;
    path(2, 3) = path(3, 2) = 1;
    CHECK(count_subnets_spectral(path) == 1);

    // two disjoint edges
    AdjMatrix pairs = AdjMatrix::Zero(4, 4);
    pairs(0, 1) = pairs(1, 0) = 1;
    pairs(2, 3) = pairs(3, 2) = 1;
    CHECK(count_subnets_spectral(pairs) == 2);
}

TEST_CASE("spectral count equals union-find on random graphs") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_index(60));
        MatrixX2 pos = random_positions(rng, n, 1000.0, 1000.0);
        AdjMatrix adj = build_adjacency(pos, rng.uniform(60.0, 300.0));
        CHECK(count_subnets_spectral(adj) == count_subnets_unionfind(adj));
    }
}

TEST_CASE("compute_hops on hand graphs") {
    AdjMatrix triangle(3, 3);
    triangle << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    HopMatrix hm = compute_hops(triangle);
    CHECK(hm.h_max == 1);
    CHECK(hm.hops(0, 1) == 1);
    CHECK(hm.hops(0, 0) == 0);

    AdjMatrix path = AdjMatrix::Zero(3, 3);
    path(0, 1) = path(1, 0) = 1;
    path(1, 2) = path(2, 1) = 1;
    hm = compute_hops(path);
    CHECK(hm.hops(0, 2) == 2);
    CHECK(hm.h_max == 2);
}

TEST_CASE("compute_hops agrees with per-source BFS oracle") {
    Rng rng(99);
    MatrixX2 pos = random_positions(rng, 40, 600.0, 600.0);
    AdjMatrix adj = build_adjacency(pos, 150.0);
    HopMatrix hm = compute_hops(adj);

    // independent single-source BFS
    const int n = 40;
    for (int src = 0; src < n; ++src) {
        std::vector<int> dist(n, -1);
        std::vector<int> frontier{src};
        dist[src] = 0;
        int level = 0;
        while (!frontier.empty()) {
            ++level;
            std::vector<int> next;
            for (int u : frontier)
                for (int v = 0; v < n; ++v)
                    if (adj(u, v) && dist[v] < 0) {
                        dist[v] = level;
                        next.push_back(v);
                    }
            frontier = std::move(next);
        }
        for (int v = 0; v < n; ++v) {
            if (dist[v] < 0)
                CHECK(hm.hops(src, v) == kUnreachable);
            else
                CHECK(hm.hops(src, v) == dist[v]);
        }
    }
}

TEST_CASE("hop matrix symmetry and triangle inequality") {
    Rng rng(5);
    MatrixX2 pos = random_positions(rng, 30, 500.0, 500.0);
    AdjMatrix adj = build_adjacency(pos, 160.0);
    HopMatrix hm = compute_hops(adj);
    const int n = 30;
    for (int i = 0; i < n; ++i) {
        CHECK(hm.hops(i, i) == 0);
        for (int j = 0; j < n; ++j) {
            CHECK(hm.hops(i, j) == hm.hops(j, i));
            if (hm.hops(i, j) == kUnreachable) continue;
            for (int k = 0; k < n; ++k) {
                if (hm.hops(i, k) == kUnreachable || hm.hops(k, j) == kUnreachable) continue;
                CHECK(hm.hops(i, j) <= hm.hops(i, k) + hm.hops(k, j));
            }
        }
    }
}

TEST_CASE("laplacian rows sum to zero and is PSD on a sample") {
    Rng rng(11);
    MatrixX2 pos = random_positions(rng, 25, 400.0, 400.0);
    AdjMatrix adj = build_adjacency(pos, 140.0);
    Matrix lap = laplacian(adj);
    for (int i = 0; i < lap.rows(); ++i) {
        const double degree = lap(i, i);
        CHECK(std::abs(lap.row(i).sum()) <= 1e-12 * std::max(1.0, degree));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(lap, Eigen::EigenvaluesOnly);
    CHECK(solver.eigenvalues().minCoeff() > -1e-9);
}
