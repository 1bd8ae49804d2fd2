#pragma once

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdsg/gco.hpp"
#include "mdsg/rng.hpp"
#include "mdsg/sim.hpp"

namespace mdsg {

// L-layer bipartite graph convolutional network. Layer l computes
// sigma((I - eps*L_batch) * X * W^l) with leaky-ReLU on hidden layers and
// identity on the output layer; dropout sits between layers during training.
struct GcnModel {
    std::vector<Matrix> layers;  // W^0: 2 x d_s, hidden: d_s x d_s, W^{L-1}: d_s x 2
    int hidden_dim = 0;
    int num_layers = 0;
    double dropout_rate = 0.1;
    double epsilon = 0.0;
    double coordinate_scale = 1000.0;  // normalization divisor, meters
};

inline GcnModel init_gcn_model(int num_layers, int hidden_dim, double epsilon,
                               double coordinate_scale, double dropout_rate,
                               std::uint64_t seed) {
    if (num_layers < 2) throw std::invalid_argument("init_gcn_model: need at least 2 layers");
    GcnModel model;
    model.num_layers = num_layers;
    model.hidden_dim = hidden_dim;
    model.dropout_rate = dropout_rate;
    model.epsilon = epsilon;
    model.coordinate_scale = coordinate_scale;
    Rng rng(seed);
    for (int l = 0; l < num_layers; ++l) {
        const int in = (l == 0) ? 2 : hidden_dim;
        const int out = (l == num_layers - 1) ? 2 : hidden_dim;
        Matrix w(in, out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j) w(i, j) = rng.uniform(-bound, bound);
        model.layers.push_back(std::move(w));
    }
    return model;
}

constexpr double kLeakySlope = 0.01;

struct ForwardCache {
    std::vector<Matrix> inputs;     // H^l, input to layer l (post dropout), size L
    std::vector<Matrix> convolved;  // M * H^l, size L
    std::vector<Matrix> preact;     // Z^l = (M*H^l)*W^l, size L
    std::vector<Matrix> masks;      // inverted dropout masks on hidden activations
};

// Returns denormalized candidate positions, (K*N) x 2.
inline Matrix gcn_forward(const GcnModel& model, const BipartiteKernel& kernel,
                          const Matrix& features, bool training, Rng* rng,
                          ForwardCache* cache = nullptr) {
    if (features.cols() != 2 || features.rows() != kernel.op.rows())
        throw ShapeMismatch("gcn_forward: feature shape does not match kernel");
    const int L = model.num_layers;
    Matrix h = features / model.coordinate_scale;
    if (cache) {
        cache->inputs.clear();
        cache->convolved.clear();
        cache->preact.clear();
        cache->masks.clear();
    }
    for (int l = 0; l < L; ++l) {
        Matrix conv = kernel.op * h;
        Matrix z = conv * model.layers[l];
        if (cache) {
            cache->inputs.push_back(std::move(h));
            cache->convolved.push_back(std::move(conv));
            cache->preact.push_back(z);
        }
        if (l < L - 1) {
            h = z.unaryExpr([](double v) { return v > 0 ? v : kLeakySlope * v; });
            if (training && model.dropout_rate > 0.0) {
                if (!rng) throw std::invalid_argument("gcn_forward: training needs an rng");
                Matrix mask(h.rows(), h.cols());
                const double keep = 1.0 - model.dropout_rate;
                for (int i = 0; i < h.rows(); ++i)
                    for (int j = 0; j < h.cols(); ++j)
                        mask(i, j) = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
                h = h.cwiseProduct(mask);
                if (cache) cache->masks.push_back(std::move(mask));
            } else if (cache) {
                cache->masks.push_back(Matrix());
            }
        } else {
            h = std::move(z);  // identity output activation
        }
    }
    return h * model.coordinate_scale;
}

struct LossParts {
    double total = 0.0;
    double time_term = 0.0;       // T_rc at the time-argmin k, seconds
    double conn_surrogate = 0.0;  // hinge on cross-component gaps, meters
    int conn_hard = 0;            // N_S - 1 at the time-argmin k
    double l1_term = 0.0;         // mean displacement over all K*N_R candidates
    int k_time = 0;               // 1-based argmin-time k
    std::vector<int> hard_subnets;   // per k
    std::vector<double> times;       // per k
    Matrix grad;                     // dLoss/dCandidates, (K*N) x 2
};

// Joint loss over the K stacked candidates. The hard sub-net count has zero
// gradient almost everywhere, so the connectivity constraint is optimized via
// a hinge on the minimum cross-component distance of each component pair; the
// hard count is still computed and reported.
inline LossParts joint_loss(const Matrix& candidates, const Matrix& origin_positions, int n_r,
                            double d_tr, double v_max, double lambda, double tau,
                            bool want_grad = false) {
    const int n = static_cast<int>(origin_positions.rows());
    if (candidates.rows() % n != 0)
        throw ShapeMismatch("joint_loss: candidate rows not a multiple of block size");
    const int K = static_cast<int>(candidates.rows()) / n;

    LossParts parts;
    parts.times.resize(K);
    parts.hard_subnets.resize(K);
    if (want_grad) parts.grad = Matrix::Zero(candidates.rows(), 2);

    int k_best = 0, i_best = 0;
    double t_best = std::numeric_limits<double>::infinity();
    double l1_sum = 0.0;

    for (int k = 0; k < K; ++k) {
        double max_disp = 0.0;
        int argmax_i = 0;
        for (int i = 0; i < n_r; ++i) {
            const int row = k * n + i;
            const double disp = (candidates.row(row) - origin_positions.row(i)).norm();
            l1_sum += disp;
            if (disp > max_disp) {
                max_disp = disp;
                argmax_i = i;
            }
        }
        parts.times[k] = max_disp / v_max;
        if (parts.times[k] < t_best) {  // strict: ties go to smaller k
            t_best = parts.times[k];
            k_best = k;
            i_best = argmax_i;
        }
        MatrixX2 cand_r = candidates.block(k * n, 0, n_r, 2);
        parts.hard_subnets[k] = count_subnets_unionfind(build_adjacency(cand_r, d_tr));
    }

    parts.time_term = t_best;
    parts.k_time = k_best + 1;
    parts.conn_hard = parts.hard_subnets[k_best] - 1;
    parts.l1_term = l1_sum / (static_cast<double>(K) * n_r);

    if (want_grad && t_best > 0.0) {
        const int row = k_best * n + i_best;
        Vec2 delta = candidates.row(row) - origin_positions.row(i_best);
        const double norm = delta.norm();
        if (norm > 1e-12) parts.grad.row(row) += (delta / (norm * v_max)).transpose();
    }

    // connectivity hinge at the time-argmin k
    {
        MatrixX2 cand_r = candidates.block(k_best * n, 0, n_r, 2);
        std::vector<int> labels = component_labels(build_adjacency(cand_r, d_tr));
        const int comps = *std::max_element(labels.begin(), labels.end()) + 1;
        for (int a = 0; a < comps; ++a) {
            for (int b = a + 1; b < comps; ++b) {
                double best_dist = std::numeric_limits<double>::infinity();
                int best_i = -1, best_j = -1;
                for (int i = 0; i < n_r; ++i) {
                    if (labels[i] != a) continue;
                    for (int j = 0; j < n_r; ++j) {
                        if (labels[j] != b) continue;
                        const double d = (cand_r.row(i) - cand_r.row(j)).norm();
                        if (d < best_dist) {
                            best_dist = d;
                            best_i = i;
                            best_j = j;
                        }
                    }
                }
                const double gap = best_dist - d_tr;
                if (gap > 0.0) {
                    parts.conn_surrogate += gap;
                    if (want_grad && best_dist > 1e-12) {
                        Vec2 dir = (cand_r.row(best_i) - cand_r.row(best_j)).transpose();
                        dir /= best_dist;
                        parts.grad.row(k_best * n + best_i) += lambda * dir.transpose();
                        parts.grad.row(k_best * n + best_j) -= lambda * dir.transpose();
                    }
                }
            }
        }
    }

    if (want_grad) {
        const double w = tau / (static_cast<double>(K) * n_r);
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < n_r; ++i) {
                const int row = k * n + i;
                Vec2 delta = candidates.row(row) - origin_positions.row(i);
                const double norm = delta.norm();
                if (norm > 1e-12) parts.grad.row(row) += w * (delta / norm).transpose();
            }
        }
    }

    parts.total = parts.time_term + lambda * parts.conn_surrogate + tau * parts.l1_term;
    return parts;
}

// Reverse-mode gradients of the loss w.r.t. every layer weight matrix.
inline std::vector<Matrix> gcn_backward(const GcnModel& model, const BipartiteKernel& kernel,
                                        const ForwardCache& cache, const Matrix& grad_output) {
    const int L = model.num_layers;
    std::vector<Matrix> grads(L);
    Matrix dh = grad_output * model.coordinate_scale;  // d/dH^L of loss on denormalized output
    for (int l = L - 1; l >= 0; --l) {
        Matrix dz;
        if (l == L - 1) {
            dz = std::move(dh);
        } else {
            Matrix ds = dh;
            if (cache.masks[l].size() > 0) ds = ds.cwiseProduct(cache.masks[l]);
            dz = ds.cwiseProduct(cache.preact[l].unaryExpr(
                [](double v) { return v > 0 ? 1.0 : kLeakySlope; }));
        }
        grads[l] = cache.convolved[l].transpose() * dz;
        if (!grads[l].allFinite())
            throw NumericalOverflow("gcn_backward: non-finite gradient");
        if (l > 0) dh = kernel.op * (dz * model.layers[l].transpose());  // kernel is symmetric
    }
    return grads;
}

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(const GcnModel& model) {
        for (const auto& w : model.layers) {
            m.push_back(Matrix::Zero(w.rows(), w.cols()));
            v.push_back(Matrix::Zero(w.rows(), w.cols()));
        }
    }
};

inline void adam_update(GcnModel& model, const std::vector<Matrix>& grads, AdamState& state,
                        double learning_rate) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        state.m[l] = state.beta1 * state.m[l] + (1.0 - state.beta1) * grads[l];
        state.v[l] = state.beta2 * state.v[l] + (1.0 - state.beta2) * grads[l].cwiseProduct(grads[l]);
        Matrix mhat = state.m[l] / bc1;
        Matrix vhat = state.v[l] / bc2;
        model.layers[l] -=
            learning_rate * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                               Matrix::Constant(vhat.rows(), vhat.cols(), state.eps));
    }
}

struct TrainConfig {
    double learning_rate = 0.0001;
    int max_epochs = 200;
    double dropout = 0.1;
    double lambda_init = 1.0;
    double tau_init = 1.0;
    bool gradnorm_enabled = true;
    int early_stop_patience = 20;
    std::uint64_t rng_seed = 0;
    std::string pretrained_path;  // optional
};

struct LossHistoryRow {
    int epoch = 0;
    double total = 0.0;
    double time_term = 0.0;
    int conn_hard = 0;
    double conn_surrogate = 0.0;
    double l1_term = 0.0;
    double lambda = 0.0;
    double tau = 0.0;
};

struct GcSolution {
    std::vector<MatrixX2> candidate_positions;  // per k, N x 2
    std::vector<double> recovery_times;         // T_rc^k, seconds
    std::vector<int> subnets;                   // hard N_S per k
    int k_star = 0;                             // 1-based
    MatrixX2 target_positions;                  // first N_R rows of the chosen candidate
    bool fallback_used = false;
};

// Among hard-connected candidates, the one with minimum recovery time; ties
// broken toward smaller k.
inline int select_k_star(const std::vector<double>& times, const std::vector<int>& subnets) {
    int best = -1;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (subnets[k] != 1) continue;
        if (best < 0 || times[k] < times[best]) best = static_cast<int>(k);
    }
    if (best < 0) throw NoConnectedCandidate("select_k_star: no candidate is connected");
    return best + 1;
}

struct TrainOutcome {
    GcnModel model;
    GcSolution solution;
    std::vector<LossHistoryRow> history;
};

namespace detail {

// Gradient norm of one loss term at the last shared layer (output weights),
// used by the GradNorm multiplier adaptation.
inline double last_layer_grad_norm(const GcnModel& model, const ForwardCache& cache,
                                   const Matrix& term_grad) {
    Matrix dz = term_grad * model.coordinate_scale;  // identity output activation
    Matrix dw = cache.convolved.back().transpose() * dz;
    return dw.norm();
}

inline double clip_multiplier(double v) { return std::clamp(v, 1e-3, 1e3); }

}  // namespace detail

// One training epoch: dropout forward, loss, GradNorm multiplier adaptation,
// Adam step. Returns the training-pass loss parts.
inline LossParts train_epoch(GcnModel& model, const BipartiteKernel& kernel,
                             const BatchGraph& batch, int n_r, double d_tr, double v_max,
                             AdamState& adam, double learning_rate, double& lambda, double& tau,
                             bool gradnorm, Rng& rng) {
    const int n = batch.block_size;
    const Matrix origin = batch.features.topRows(n);
    ForwardCache cache;
    Matrix out = gcn_forward(model, kernel, batch.features, true, &rng, &cache);
    LossParts parts = joint_loss(out, origin, n_r, d_tr, v_max, lambda, tau, true);

    if (gradnorm) {
        // per-term gradient norms at the last shared layer
        LossParts t_only = joint_loss(out, origin, n_r, d_tr, v_max, 0.0, 0.0, true);
        LossParts c_only = joint_loss(out, origin, n_r, d_tr, v_max, 1.0, 0.0, true);
        LossParts l_only = joint_loss(out, origin, n_r, d_tr, v_max, 0.0, 1.0, true);
        Matrix conn_grad = c_only.grad - t_only.grad;
        Matrix l1_grad = l_only.grad - t_only.grad;
        const double g_time = detail::last_layer_grad_norm(model, cache, t_only.grad);
        const double g_conn = lambda * detail::last_layer_grad_norm(model, cache, conn_grad);
        const double g_l1 = tau * detail::last_layer_grad_norm(model, cache, l1_grad);
        const double mean = (g_time + g_conn + g_l1) / 3.0;
        if (g_conn > 1e-12)
            lambda = detail::clip_multiplier(lambda * std::sqrt(mean / g_conn));
        if (g_l1 > 1e-12) tau = detail::clip_multiplier(tau * std::sqrt(mean / g_l1));
        // recompute the training gradient with the adapted multipliers
        parts = joint_loss(out, origin, n_r, d_tr, v_max, lambda, tau, true);
    }

    std::vector<Matrix> grads = gcn_backward(model, kernel, cache, parts.grad);
    adam_update(model, grads, adam, learning_rate);
    return parts;
}

// Dropout-off evaluation of the current model on a batch.
inline LossParts evaluate_model(const GcnModel& model, const BipartiteKernel& kernel,
                                const BatchGraph& batch, int n_r, double d_tr, double v_max,
                                double lambda, double tau, Matrix* out_candidates = nullptr) {
    const Matrix origin = batch.features.topRows(batch.block_size);
    Matrix out = gcn_forward(model, kernel, batch.features, false, nullptr);
    LossParts parts = joint_loss(out, origin, n_r, d_tr, v_max, lambda, tau, false);
    if (out_candidates) *out_candidates = std::move(out);
    return parts;
}

inline void save_model(const GcnModel& model, const std::string& path);
inline GcnModel load_model(const std::string& path);

// Per-scenario training. Keeps the best-epoch connected solution (evaluated
// with dropout off); falls back to the all-nodes-to-centroid solution when no
// epoch produces a connected candidate.
inline TrainOutcome train(GcnModel model, const BatchGraph& batch, const Usnet& usnet,
                          const DamageScenario& scenario, const TrainConfig& config) {
    if (!config.pretrained_path.empty()) model = load_model(config.pretrained_path);
    model.dropout_rate = config.dropout;

    const int n = batch.block_size;
    const int n_r = scenario.n_remaining();
    const double d_tr = usnet.config.d_tr;
    const double v_max = usnet.config.v_max;
    BipartiteKernel kernel = BipartiteKernel::from_laplacian(batch.laplacian_matrix(), batch.epsilon);

    AdamState adam(model);
    Rng rng(config.rng_seed);
    double lambda = config.lambda_init;
    double tau = config.tau_init;

    TrainOutcome outcome;
    double best_time = std::numeric_limits<double>::infinity();
    Matrix best_candidates;
    int stale_epochs = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        LossParts parts = train_epoch(model, kernel, batch, n_r, d_tr, v_max, adam,
                                      config.learning_rate, lambda, tau,
                                      config.gradnorm_enabled, rng);
        outcome.history.push_back({epoch, parts.total, parts.time_term, parts.conn_hard,
                                   parts.conn_surrogate, parts.l1_term, lambda, tau});

        Matrix candidates;
        LossParts eval = evaluate_model(model, kernel, batch, n_r, d_tr, v_max, lambda, tau,
                                        &candidates);
        bool improved = false;
        for (std::size_t k = 0; k < eval.times.size(); ++k) {
            if (eval.hard_subnets[k] == 1 && eval.times[k] < best_time * (1.0 - 1e-4)) {
                improved = true;
                break;
            }
        }
        bool any_connected = false;
        for (int s : eval.hard_subnets)
            if (s == 1) any_connected = true;
        if (any_connected) {
            int k_star = select_k_star(eval.times, eval.hard_subnets);
            if (eval.times[k_star - 1] < best_time) {
                best_time = eval.times[k_star - 1];
                best_candidates = candidates;
            }
        }
        stale_epochs = improved ? 0 : stale_epochs + 1;
        if (std::isfinite(best_time) && stale_epochs >= config.early_stop_patience) break;
    }

    GcSolution sol;
    if (best_candidates.size() > 0) {
        LossParts eval = joint_loss(best_candidates, batch.features.topRows(n), n_r, d_tr, v_max,
                                    lambda, tau, false);
        sol.recovery_times = eval.times;
        sol.subnets = eval.hard_subnets;
        for (int k = 0; k < batch.batch_k; ++k)
            sol.candidate_positions.push_back(best_candidates.block(k * n, 0, n, 2));
        sol.k_star = select_k_star(sol.recovery_times, sol.subnets);
        sol.target_positions = sol.candidate_positions[sol.k_star - 1].topRows(n_r);
        sol.fallback_used = false;
    } else {
        // centroid of all pre-damage nodes; connected by the disk argument
        Vec2 center = batch.features.topRows(n).colwise().mean();
        sol.target_positions = MatrixX2(n_r, 2);
        for (int i = 0; i < n_r; ++i) sol.target_positions.row(i) = center.transpose();
        sol.k_star = 0;
        sol.fallback_used = true;
        MatrixX2 start = remaining_positions(usnet, scenario);
        double t = 0.0;
        for (int i = 0; i < n_r; ++i)
            t = std::max(t, (start.row(i) - sol.target_positions.row(i)).norm() / v_max);
        sol.recovery_times.assign(static_cast<std::size_t>(batch.batch_k), t);
        sol.subnets.assign(static_cast<std::size_t>(batch.batch_k), 1);
    }

    outcome.model = std::move(model);
    outcome.solution = std::move(sol);
    return outcome;
}

// Full-speed straight-line flight to the trained targets.
inline RecoveryResult gc_recover(const Usnet& usnet, const DamageScenario& scenario,
                                 const GcSolution& solution, bool record_trajectory = false) {
    const SwarmConfig& config = usnet.config;
    MatrixX2 start = remaining_positions(usnet, scenario);
    double max_dist = 0.0;
    for (int i = 0; i < start.rows(); ++i)
        max_dist = std::max(max_dist, (solution.target_positions.row(i) - start.row(i)).norm());
    SimOptions options;
    options.algo_tag = "gc";
    options.record_trajectory = record_trajectory;
    options.max_steps =
        static_cast<int>(std::ceil(max_dist / (config.v_max * config.dt) * 1.1)) + 2;
    RecoveryResult res =
        simulate(start, target_policy(solution.target_positions, config), config, options);
    res.algo_tag = "gc";
    res.k_used = solution.k_star;
    res.fallback_used = solution.fallback_used;
    return res;
}

// --- model persistence -------------------------------------------------

// Little-endian binary: magic, version, L, d_s, eps, coordinate scale, then
// per-layer dims and row-major float64 weights.
constexpr char kModelMagic[8] = {'M', 'D', 'S', 'G', 'G', 'C', 'N', '\0'};
constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const GcnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("save_model: cannot open " + path);
    out.write(kModelMagic, 8);
    auto write_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto write_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    write_u32(kModelVersion);
    write_u32(static_cast<std::uint32_t>(model.num_layers));
    write_u32(static_cast<std::uint32_t>(model.hidden_dim));
    write_f64(model.dropout_rate);
    write_f64(model.epsilon);
    write_f64(model.coordinate_scale);
    for (const auto& w : model.layers) {
        write_u32(static_cast<std::uint32_t>(w.rows()));
        write_u32(static_cast<std::uint32_t>(w.cols()));
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) write_f64(w(i, j));
    }
    if (!out) throw FormatError("save_model: write failed for " + path);
}

inline GcnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_model: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw FormatError("load_model: bad magic in " + path);
    auto read_u32 = [&]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto read_f64 = [&]() {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::uint32_t version = read_u32();
    if (version != kModelVersion) throw FormatError("load_model: unsupported version");
    GcnModel model;
    model.num_layers = static_cast<int>(read_u32());
    model.hidden_dim = static_cast<int>(read_u32());
    model.dropout_rate = read_f64();
    model.epsilon = read_f64();
    model.coordinate_scale = read_f64();
    if (model.num_layers < 2 || model.num_layers > 1024 || model.hidden_dim < 1 ||
        model.hidden_dim > 65536)
        throw FormatError("load_model: implausible dimensions");
    for (int l = 0; l < model.num_layers; ++l) {
        const int rows = static_cast<int>(read_u32());
        const int cols = static_cast<int>(read_u32());
        const int expect_rows = (l == 0) ? 2 : model.hidden_dim;
        const int expect_cols = (l == model.num_layers - 1) ? 2 : model.hidden_dim;
        if (rows != expect_rows || cols != expect_cols)
            throw FormatError("load_model: layer dimension mismatch");
        Matrix w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = read_f64();
        model.layers.push_back(std::move(w));
    }
    if (!in) throw FormatError("load_model: truncated file " + path);
    return model;
}

}  // namespace mdsg
