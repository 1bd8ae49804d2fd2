#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdsg/metrics.hpp"
#include "mdsg/sim.hpp"

namespace mdsg {

using nlohmann::json;

constexpr int kScenarioFileVersion = 1;

// Scenario file: the generating seed plus swarm config plus the damage set.
// All ids are 0-based on disk.
struct ScenarioFile {
    SwarmConfig config;
    std::vector<int> destroyed;

    Usnet regenerate_usnet() const { return generate_usnet(config); }

    DamageScenario scenario(int n_total) const {
        DamageScenario s;
        s.destroyed = destroyed;
        std::vector<char> gone(n_total, 0);
        for (int d : destroyed) {
            if (d < 0 || d >= n_total) throw FormatError("scenario: destroyed id out of range");
            gone[d] = 1;
        }
        for (int i = 0; i < n_total; ++i)
            if (!gone[i]) s.remaining.push_back(i);
        s.validate(n_total);
        return s;
    }
};

inline json config_to_json(const SwarmConfig& c) {
    return json{{"n_total", c.n_total},   {"area_width", c.area_width},
                {"area_height", c.area_height}, {"d_tr", c.d_tr},
                {"v_max", c.v_max},       {"dt", c.dt}};
}

inline SwarmConfig config_from_json(const json& j, std::uint64_t seed) {
    SwarmConfig c;
    c.n_total = j.at("n_total").get<int>();
    c.area_width = j.at("area_width").get<double>();
    c.area_height = j.at("area_height").get<double>();
    c.d_tr = j.at("d_tr").get<double>();
    c.v_max = j.at("v_max").get<double>();
    c.dt = j.at("dt").get<double>();
    c.rng_seed = seed;
    c.validate();
    return c;
}

inline void save_scenario(const ScenarioFile& sf, const std::string& path) {
    json j;
    j["version"] = kScenarioFileVersion;
    j["seed"] = sf.config.rng_seed;
    j["config"] = config_to_json(sf.config);
    j["destroyed"] = sf.destroyed;
    std::ofstream out(path);
    if (!out) throw FormatError("save_scenario: cannot open " + path);
    out << j.dump(2) << "\n";
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_scenario: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("load_scenario: bad JSON: ") + e.what());
    }
    if (j.value("version", -1) != kScenarioFileVersion)
        throw FormatError("load_scenario: unknown schema version");
    ScenarioFile sf;
    sf.config = config_from_json(j.at("config"), j.at("seed").get<std::uint64_t>());
    sf.destroyed = j.at("destroyed").get<std::vector<int>>();
    return sf;
}

inline json positions_to_json(const MatrixX2& pos) {
    json arr = json::array();
    for (int i = 0; i < pos.rows(); ++i) arr.push_back({pos(i, 0), pos(i, 1)});
    return arr;
}

inline void save_result(const RecoveryResult& result, const std::string& path,
                        const std::string& trajectory_file = "") {
    json j;
    j["version"] = 1;
    j["algo"] = result.algo_tag;
    j["t_r_seconds"] = result.t_rc;
    j["steps"] = result.steps;
    j["ns_series"] = result.ns_series;
    j["final_positions"] = positions_to_json(result.final_positions);
    j["k"] = result.k_used;
    j["fallback_used"] = result.fallback_used;
    if (!trajectory_file.empty()) j["trajectory_file"] = trajectory_file;
    std::ofstream out(path);
    if (!out) throw FormatError("save_result: cannot open " + path);
    out << j.dump(2) << "\n";
}

inline void save_trajectory_csv(const RecoveryResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_trajectory_csv: cannot open " + path);
    out << "step,node_id,x,y\n";
    out << std::setprecision(17);
    for (std::size_t s = 0; s < result.trajectory.size(); ++s)
        for (int i = 0; i < result.trajectory[s].rows(); ++i)
            out << s << "," << i << "," << result.trajectory[s](i, 0) << ","
                << result.trajectory[s](i, 1) << "\n";
}

inline void save_adjacency_csv(const AdjMatrix& adjacency, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_adjacency_csv: cannot open " + path);
    for (int i = 0; i < adjacency.rows(); ++i) {
        for (int j = 0; j < adjacency.cols(); ++j) {
            if (j) out << ",";
            out << adjacency(i, j);
        }
        out << "\n";
    }
}

inline std::string metrics_csv_header() {
    return "scenario_id,algo,k_or_kstar,t_rc,coverage_ratio,final_subnets";
}

inline std::string metrics_csv_row(const std::string& scenario_id, const std::string& algo,
                                   int k, const MetricsReport& report) {
    std::ostringstream os;
    os << std::setprecision(17) << scenario_id << "," << algo << "," << k << ","
       << report.recovery_time << "," << report.coverage_ratio << "," << report.final_subnets;
    return os.str();
}

inline void save_degree_cdf_csv(const std::string& scenario_id,
                                const std::vector<std::pair<int, double>>& cdf,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_degree_cdf_csv: cannot open " + path);
    out << "scenario_id,d,P_d\n" << std::setprecision(17);
    for (const auto& [d, p] : cdf) out << scenario_id << "," << d << "," << p << "\n";
}

// Case-study figure: start/final positions, trajectories and d_tr disks.
inline void save_recovery_svg(const RecoveryResult& result, const MatrixX2& start_positions,
                              const SwarmConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_recovery_svg: cannot open " + path);
    const double w = config.area_width, h = config.area_height;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << " " << h
        << "\" width=\"800\" height=\"800\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    for (std::size_t s = 1; s < result.trajectory.size(); ++s) {
        for (int i = 0; i < result.trajectory[s].rows(); ++i) {
            out << "<line x1=\"" << result.trajectory[s - 1](i, 0) << "\" y1=\""
                << result.trajectory[s - 1](i, 1) << "\" x2=\"" << result.trajectory[s](i, 0)
                << "\" y2=\"" << result.trajectory[s](i, 1)
                << "\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"/>\n";
        }
    }
    for (int i = 0; i < start_positions.rows(); ++i)
        out << "<circle cx=\"" << start_positions(i, 0) << "\" cy=\"" << start_positions(i, 1)
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    for (int i = 0; i < result.final_positions.rows(); ++i) {
        out << "<circle cx=\"" << result.final_positions(i, 0) << "\" cy=\""
            << result.final_positions(i, 1) << "\" r=\"3\" fill=\"#d62728\"/>\n";
        out << "<circle cx=\"" << result.final_positions(i, 0) << "\" cy=\""
            << result.final_positions(i, 1) << "\" r=\"" << config.d_tr / 2.0
            << "\" fill=\"none\" stroke=\"#d6272833\" stroke-width=\"0.5\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace mdsg
