// Command-line harness: scenario generation, single recoveries, batch
// experiments, pretraining, diffusion traces and metrics export.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mdsg/apf.hpp"
#include "mdsg/gcn.hpp"
#include "mdsg/io.hpp"
#include "mdsg/metrics.hpp"

namespace fs = std::filesystem;
using namespace mdsg;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GcProfile {
    int layers;
    int hidden;
};

GcProfile gc_profile(const std::string& name) {
    if (name == "desk") return {4, 64};
    if (name == "paper") return {8, 512};
    throw std::invalid_argument("unknown profile: " + name);
}

void write_loss_history(const std::vector<LossHistoryRow>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path);
    out << "epoch,total,time_term,conn_hard,conn_surrogate,l1,lambda,tau\n"
        << std::setprecision(17);
    for (const auto& r : history)
        out << r.epoch << "," << r.total << "," << r.time_term << "," << r.conn_hard << ","
            << r.conn_surrogate << "," << r.l1_term << "," << r.lambda << "," << r.tau << "\n";
}

TrainOutcome run_gc_training(const Usnet& usnet, const DamageScenario& scenario, int epochs,
                             const GcProfile& profile, const std::string& pretrained,
                             std::uint64_t seed) {
    HopMatrix hops = compute_hops(usnet.adjacency);
    const int K = choose_K(hops.h_max);
    BatchGraph batch = build_batch(build_united_series(scenario, usnet, hops, K));
    GcnModel model = init_gcn_model(profile.layers, profile.hidden, batch.epsilon,
                                    usnet.config.area_width, 0.1, seed);
    TrainConfig config;
    config.max_epochs = epochs;
    config.rng_seed = seed;
    config.pretrained_path = pretrained;
    return train(std::move(model), batch, usnet, scenario, config);
}

RecoveryResult run_algo(const std::string& algo, const Usnet& usnet,
                        const DamageScenario& scenario, int k, int epochs,
                        const GcProfile& profile, const std::string& pretrained,
                        std::uint64_t seed, bool record_trajectory,
                        std::vector<LossHistoryRow>* history = nullptr) {
    if (algo == "apf") return apf_recover(usnet, scenario, k, record_trajectory);
    if (algo == "centering") return centering_baseline(usnet, scenario, record_trajectory);
    if (algo == "gc") {
        TrainOutcome outcome = run_gc_training(usnet, scenario, epochs, profile, pretrained, seed);
        if (history) *history = outcome.history;
        return gc_recover(usnet, scenario, outcome.solution, record_trajectory);
    }
    throw std::invalid_argument("unknown algorithm: " + algo);
}

// ---- experiment ---------------------------------------------------------

struct Cell {
    int n_destroyed;
    int repeat;
    std::string algo;
};

std::string cell_row_path(const fs::path& out_dir, const Cell& c) {
    std::ostringstream os;
    os << "nd" << c.n_destroyed << "_r" << c.repeat << "_" << c.algo << ".csv";
    return (out_dir / "runs" / os.str()).string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    return fields;
}

int cmd_experiment(const SwarmConfig& base, const std::vector<int>& sizes, int repeats,
                   const std::vector<std::string>& algos, std::uint64_t seed_base, int k,
                   int epochs, const GcProfile& profile, const std::string& pretrained,
                   const fs::path& out_dir) {
    for (int nd : sizes)
        if (nd < 1 || nd >= base.n_total)
            throw std::invalid_argument("experiment: need 1 <= N_D < N");
    if (repeats < 1) throw std::invalid_argument("experiment: repeats must be >= 1");

    fs::create_directories(out_dir / "runs");
    std::vector<Cell> cells;
    for (int nd : sizes)
        for (int rep = 0; rep < repeats; ++rep)
            for (const auto& algo : algos) cells.push_back({nd, rep, algo});

    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MDSG_WORKERS")) workers = std::atoi(env);
    workers = std::max(1, std::min(workers, static_cast<int>(cells.size())));

    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    std::vector<std::string> failures;
    int skipped = 0;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& c = cells[i];
            const std::string row_path = cell_row_path(out_dir, c);
            std::error_code ec;
            if (fs::exists(row_path, ec) && fs::file_size(row_path, ec) > 0) {
                std::lock_guard<std::mutex> lock(report_mutex);
                ++skipped;
                continue;
            }
            try {
                const std::uint64_t seed =
                    derive_seed(seed_base, static_cast<std::uint64_t>(c.n_destroyed),
                                static_cast<std::uint64_t>(c.repeat));
                SwarmConfig config = base;
                config.rng_seed = seed;
                Usnet usnet = generate_usnet(config);
                DamageScenario scenario =
                    make_damage_scenario(config.n_total, c.n_destroyed, derive_seed(seed, 7, 0));
                RecoveryResult res = run_algo(c.algo, usnet, scenario, k, epochs, profile,
                                              pretrained, derive_seed(seed, 11, 0), false);
                MetricsReport report = recovery_summary(res, usnet, scenario);
                std::ostringstream id;
                id << "nd" << c.n_destroyed << "-r" << c.repeat;
                const std::string tmp = row_path + ".tmp";
                {
                    std::ofstream out(tmp);
                    out << metrics_csv_row(id.str(), c.algo, res.k_used, report) << "\n";
                }
                fs::rename(tmp, row_path);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(report_mutex);
                std::ostringstream os;
                os << "nd" << c.n_destroyed << "-r" << c.repeat << "/" << c.algo << ": "
                   << e.what();
                failures.push_back(os.str());
            }
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // aggregate: per-run rows plus per-(algo, N_D) mean/stddev
    std::ofstream results(out_dir / "results.csv");
    results << metrics_csv_header() << "\n";
    std::map<std::pair<std::string, int>, std::vector<std::pair<double, double>>> by_cell;
    for (const Cell& c : cells) {
        std::ifstream in(cell_row_path(out_dir, c));
        std::string line;
        if (!in || !std::getline(in, line)) continue;
        results << line << "\n";
        auto fields = split_csv_line(line);
        if (fields.size() >= 6)
            by_cell[{c.algo, c.n_destroyed}].push_back(
                {std::stod(fields[3]), std::stod(fields[4])});
    }
    std::ofstream agg(out_dir / "aggregates.csv");
    agg << "algo,n_destroyed,runs,mean_t_rc,stddev_t_rc,mean_coverage_ratio\n"
        << std::setprecision(17);
    for (const auto& [key, rows] : by_cell) {
        double mean_t = 0.0, mean_cov = 0.0;
        for (const auto& [t, cov] : rows) {
            mean_t += t;
            mean_cov += cov;
        }
        mean_t /= rows.size();
        mean_cov /= rows.size();
        double var = 0.0;
        for (const auto& [t, cov] : rows) var += (t - mean_t) * (t - mean_t);
        const double stddev = rows.size() > 1 ? std::sqrt(var / (rows.size() - 1)) : 0.0;
        agg << key.first << "," << key.second << "," << rows.size() << "," << mean_t << ","
            << stddev << "," << mean_cov << "\n";
    }

    std::cerr << "experiment: " << cells.size() - failures.size() << " cells done (" << skipped
              << " reused), " << failures.size() << " failed\n";
    if (!failures.empty()) {
        for (const auto& f : failures) std::cerr << "  failed: " << f << "\n";
        return kExitRuntime;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV swarm network recovery simulator"};
    app.require_subcommand(1);

    // shared swarm-config flags
    SwarmConfig base;
    std::uint64_t seed = 1;
    auto add_config_flags = [&](CLI::App* cmd) {
        cmd->add_option("--n", base.n_total, "swarm size N");
        cmd->add_option("--width", base.area_width, "deployment area width, m");
        cmd->add_option("--height", base.area_height, "deployment area height, m");
        cmd->add_option("--d-tr", base.d_tr, "transmission range, m");
        cmd->add_option("--v-max", base.v_max, "maximum speed, m/s");
        cmd->add_option("--dt", base.dt, "integration step, s");
        cmd->add_option("--seed", seed, "base RNG seed");
    };

    // generate
    auto* generate = app.add_subcommand("generate", "generate a scenario file");
    add_config_flags(generate);
    int n_destroyed = 0;
    std::string out_path, adjacency_out;
    generate->add_option("--n-destroyed", n_destroyed, "damage size N_D")->required();
    generate->add_option("--out", out_path, "scenario JSON path")->required();
    generate->add_option("--adjacency-out", adjacency_out, "optional 0/1 adjacency CSV");

    // recover
    auto* recover = app.add_subcommand("recover", "run one recovery");
    std::string scenario_path, algo = "apf", pretrained, profile_name = "desk";
    std::string result_path, trajectory_path, metrics_path, loss_path, svg_path;
    int hop_k = 3, epochs = 200;
    recover->add_option("--scenario", scenario_path, "scenario JSON")->required();
    recover->add_option("--algo", algo, "apf | gc | centering");
    recover->add_option("--k", hop_k, "hop depth for apf");
    recover->add_option("--epochs", epochs, "training epochs for gc");
    recover->add_option("--pretrained", pretrained, "pretrained model for gc");
    recover->add_option("--profile", profile_name, "gc size profile: desk | paper");
    recover->add_option("--seed", seed, "training seed for gc");
    recover->add_option("--out", result_path, "result JSON path")->required();
    recover->add_option("--trajectory", trajectory_path, "optional trajectory CSV");
    recover->add_option("--metrics-out", metrics_path, "optional metrics CSV");
    recover->add_option("--loss-out", loss_path, "optional loss history CSV (gc)");
    recover->add_option("--svg", svg_path, "optional recovery figure SVG");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "batch runs over damage sizes");
    add_config_flags(experiment);
    base.n_total = 60;
    base.area_width = base.area_height = 600.0;
    std::vector<int> damage_sizes{15, 30, 45};
    std::vector<std::string> algos{"apf", "centering"};
    int repeats = 10;
    std::string exp_dir;
    experiment->add_option("--damage-sizes", damage_sizes, "list of N_D values");
    experiment->add_option("--repeats", repeats, "repeats per damage size");
    experiment->add_option("--algos", algos, "algorithms to run");
    experiment->add_option("--k", hop_k, "hop depth for apf");
    experiment->add_option("--epochs", epochs, "training epochs for gc");
    experiment->add_option("--profile", profile_name, "gc size profile");
    experiment->add_option("--pretrained", pretrained, "pretrained model for gc");
    experiment->add_option("--out-dir", exp_dir, "output directory")->required();

    // train-pretrained
    auto* pretrain = app.add_subcommand("train-pretrained", "pretrain a gc model over scenarios");
    std::string scenarios_dir, model_out;
    int pre_epochs = 40;
    pretrain->add_option("--scenarios", scenarios_dir, "directory of scenario JSONs")->required();
    pretrain->add_option("--out", model_out, "model file path")->required();
    pretrain->add_option("--epochs", pre_epochs, "epochs per scenario");
    pretrain->add_option("--profile", profile_name, "gc size profile");
    pretrain->add_option("--seed", seed, "init/dropout seed");

    // gco-trace
    auto* trace = app.add_subcommand("gco-trace", "dump diffusion iterate snapshots");
    int trace_k = 1, trace_iters = 100, trace_stride = 1;
    trace->add_option("--scenario", scenario_path, "scenario JSON")->required();
    trace->add_option("--k", trace_k, "hop depth of the united graph");
    trace->add_option("--iters", trace_iters, "iterations to trace");
    trace->add_option("--stride", trace_stride, "snapshot stride");
    trace->add_option("--out", out_path, "trace CSV path")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "metrics for an existing result");
    std::string metrics_result, cdf_out;
    double cell_size = 2.0;
    metrics->add_option("--scenario", scenario_path, "scenario JSON")->required();
    metrics->add_option("--result", metrics_result, "result JSON")->required();
    metrics->add_option("--out", out_path, "metrics CSV path")->required();
    metrics->add_option("--cdf-out", cdf_out, "optional degree CDF CSV");
    metrics->add_option("--cell", cell_size, "coverage raster cell size, m");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*generate) {
            base.rng_seed = seed;
            base.validate();
            Usnet usnet = generate_usnet(base);
            ScenarioFile sf;
            sf.config = base;
            sf.destroyed =
                make_damage_scenario(base.n_total, n_destroyed, derive_seed(seed, 7, 0)).destroyed;
            save_scenario(sf, out_path);
            if (!adjacency_out.empty()) save_adjacency_csv(usnet.adjacency, adjacency_out);
        } else if (*recover) {
            ScenarioFile sf = load_scenario(scenario_path);
            Usnet usnet = sf.regenerate_usnet();
            DamageScenario scenario = sf.scenario(usnet.size());
            std::vector<LossHistoryRow> history;
            const bool record = !trajectory_path.empty() || !svg_path.empty();
            RecoveryResult res = run_algo(algo, usnet, scenario, hop_k, epochs,
                                          gc_profile(profile_name), pretrained, seed, record,
                                          &history);
            if (!trajectory_path.empty()) save_trajectory_csv(res, trajectory_path);
            save_result(res, result_path, trajectory_path);
            if (!loss_path.empty()) write_loss_history(history, loss_path);
            if (!svg_path.empty())
                save_recovery_svg(res, remaining_positions(usnet, scenario), usnet.config,
                                  svg_path);
            if (!metrics_path.empty()) {
                MetricsReport report = recovery_summary(res, usnet, scenario);
                std::ofstream out(metrics_path);
                out << metrics_csv_header() << "\n"
                    << metrics_csv_row(fs::path(scenario_path).stem().string(), algo, res.k_used,
                                       report)
                    << "\n";
            }
        } else if (*experiment) {
            base.rng_seed = seed;
            base.validate();
            return cmd_experiment(base, damage_sizes, repeats, algos, seed, hop_k, epochs,
                                  gc_profile(profile_name), pretrained, exp_dir);
        } else if (*pretrain) {
            std::vector<std::string> files;
            for (const auto& entry : fs::directory_iterator(scenarios_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path().string());
            std::sort(files.begin(), files.end());
            if (files.empty())
                throw FormatError("train-pretrained: no scenario files in " + scenarios_dir);

            GcProfile profile = gc_profile(profile_name);
            GcnModel model;
            std::optional<AdamState> adam;
            Rng rng(derive_seed(seed, 13, 0));
            double lambda = 1.0, tau = 1.0;
            for (const auto& file : files) {
                ScenarioFile sf = load_scenario(file);
                Usnet usnet = sf.regenerate_usnet();
                DamageScenario scenario = sf.scenario(usnet.size());
                HopMatrix hops = compute_hops(usnet.adjacency);
                const int K = choose_K(hops.h_max);
                BatchGraph batch = build_batch(build_united_series(scenario, usnet, hops, K));
                if (model.layers.empty()) {
                    model = init_gcn_model(profile.layers, profile.hidden, batch.epsilon,
                                           usnet.config.area_width, 0.1, seed);
                    adam.emplace(model);
                }
                BipartiteKernel kernel =
                    BipartiteKernel::from_laplacian(batch.laplacian_matrix(), batch.epsilon);
                for (int epoch = 0; epoch < pre_epochs; ++epoch)
                    train_epoch(model, kernel, batch, scenario.n_remaining(), usnet.config.d_tr,
                                usnet.config.v_max, *adam, 0.0001, lambda, tau, true, rng);
            }
            save_model(model, model_out);
        } else if (*trace) {
            ScenarioFile sf = load_scenario(scenario_path);
            Usnet usnet = sf.regenerate_usnet();
            DamageScenario scenario = sf.scenario(usnet.size());
            HopMatrix hops = compute_hops(usnet.adjacency);
            UnitedMdsg united = build_united_mdsg(scenario, usnet, hops, trace_k);
            BipartiteKernel kernel = BipartiteKernel::from_united(united);
            std::ofstream out(out_path);
            if (!out) throw FormatError("gco-trace: cannot open " + out_path);
            out << "iter,node_id,x,y\n" << std::setprecision(17);
            Matrix x = united.feature_positions;
            for (int it = 0; it <= trace_iters; ++it) {
                if (it % trace_stride == 0)
                    for (int i = 0; i < x.rows(); ++i)
                        out << it << "," << i << "," << x(i, 0) << "," << x(i, 1) << "\n";
                if (it < trace_iters) x = gco_step(kernel, x);
            }
        } else if (*metrics) {
            ScenarioFile sf = load_scenario(scenario_path);
            Usnet usnet = sf.regenerate_usnet();
            DamageScenario scenario = sf.scenario(usnet.size());
            std::ifstream in(metrics_result);
            if (!in) throw FormatError("metrics: cannot open " + metrics_result);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw FormatError(std::string("metrics: bad result JSON: ") + e.what());
            }
            RecoveryResult res;
            res.algo_tag = j.value("algo", "unknown");
            res.t_rc = j.at("t_r_seconds").get<double>();
            res.steps = j.at("steps").get<int>();
            res.k_used = j.value("k", 0);
            auto fp = j.at("final_positions");
            res.final_positions.resize(static_cast<int>(fp.size()), 2);
            for (int i = 0; i < res.final_positions.rows(); ++i) {
                res.final_positions(i, 0) = fp[i][0].get<double>();
                res.final_positions(i, 1) = fp[i][1].get<double>();
            }
            MetricsReport report = recovery_summary(res, usnet, scenario, cell_size);
            std::ofstream out(out_path);
            out << metrics_csv_header() << "\n"
                << metrics_csv_row(fs::path(scenario_path).stem().string(), res.algo_tag,
                                   res.k_used, report)
                << "\n";
            if (!cdf_out.empty()) {
                RemainedGraph g = build_remained_graph(res.final_positions, usnet.config.d_tr);
                save_degree_cdf_csv(fs::path(scenario_path).stem().string(), degree_cdf(g),
                                    cdf_out);
            }
        }
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
