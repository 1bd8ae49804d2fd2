#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdsg/apf.hpp"
#include "mdsg/io.hpp"

using namespace mdsg;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ScenarioFile sample_scenario() {
    ScenarioFile sf;
    sf.config.n_total = 60;
    sf.config.area_width = 600.0;
    sf.config.area_height = 600.0;
    sf.config.rng_seed = 42;
    sf.destroyed = {1, 5, 9, 30};
    return sf;
}

}  // namespace

TEST_CASE("scenario JSON round trip is byte-deterministic") {
    ScenarioFile sf = sample_scenario();
    save_scenario(sf, "io_scn_a.json");
    ScenarioFile loaded = load_scenario("io_scn_a.json");
    CHECK(loaded.config.n_total == sf.config.n_total);
    CHECK(loaded.config.area_width == sf.config.area_width);
    CHECK(loaded.config.d_tr == sf.config.d_tr);
    CHECK(loaded.config.v_max == sf.config.v_max);
    CHECK(loaded.config.dt == sf.config.dt);
    CHECK(loaded.config.rng_seed == sf.config.rng_seed);
    CHECK(loaded.destroyed == sf.destroyed);

    save_scenario(loaded, "io_scn_b.json");
    CHECK(slurp("io_scn_a.json") == slurp("io_scn_b.json"));
    std::remove("io_scn_a.json");
    std::remove("io_scn_b.json");
}

TEST_CASE("scenario regeneration reproduces the same swarm") {
    ScenarioFile sf = sample_scenario();
    Usnet a = sf.regenerate_usnet();
    Usnet b = sf.regenerate_usnet();
    CHECK(a.positions == b.positions);
    DamageScenario s = sf.scenario(sf.config.n_total);
    CHECK(s.n_remaining() + static_cast<int>(s.destroyed.size()) == sf.config.n_total);
}

TEST_CASE("scenario loader rejects bad inputs") {
    SUBCASE("unknown version") {
        std::ofstream("io_bad_version.json")
            << R"({"version": 99, "seed": 1, "config": {}, "destroyed": []})";
        CHECK_THROWS_AS(load_scenario("io_bad_version.json"), FormatError);
        std::remove("io_bad_version.json");
    }
    SUBCASE("malformed JSON") {
        std::ofstream("io_bad_json.json") << "{not json";
        CHECK_THROWS_AS(load_scenario("io_bad_json.json"), FormatError);
        std::remove("io_bad_json.json");
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_scenario("io_nope.json"), FormatError); }
    SUBCASE("destroyed id out of range") {
        ScenarioFile sf = sample_scenario();
        sf.destroyed = {59, 60};
        CHECK_THROWS_AS(sf.scenario(60), FormatError);
    }
}

TEST_CASE("result JSON carries the documented fields") {
    ScenarioFile sf = sample_scenario();
    Usnet u = sf.regenerate_usnet();
    DamageScenario s = sf.scenario(u.size());
    RecoveryResult res = apf_recover(u, s, 3);
    save_result(res, "io_result.json", "traj.csv");

    std::ifstream in("io_result.json");
    json j;
    in >> j;
    CHECK(j.at("version") == 1);
    CHECK(j.at("algo") == "apf");
    CHECK(j.at("t_r_seconds").get<double>() == res.t_rc);
    CHECK(j.at("steps").get<int>() == res.steps);
    CHECK(j.at("ns_series").get<std::vector<int>>() == res.ns_series);
    CHECK(j.at("trajectory_file") == "traj.csv");
    auto fp = j.at("final_positions");
    REQUIRE(static_cast<int>(fp.size()) == res.final_positions.rows());
    CHECK(fp[0][0].get<double>() == res.final_positions(0, 0));
    std::remove("io_result.json");
}

TEST_CASE("trajectory CSV format") {
    MatrixX2 pos(2, 2);
    pos << 0.0, 0.0, 200.0, 0.0;
    SwarmConfig c;
    c.n_total = 2;
    MatrixX2 vel(2, 2);
    vel << 10.0, 0.0, 0.0, 0.0;
    SimOptions options;
    options.record_trajectory = true;
    RecoveryResult res = simulate(pos, [vel](int, const MatrixX2&) { return vel; }, c, options);
    save_trajectory_csv(res, "io_traj.csv");

    std::ifstream in("io_traj.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,node_id,x,y");
    std::getline(in, line);
    CHECK(line == "0,0,0,0");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    // (steps+1) snapshots x 2 nodes, minus the row consumed above
    CHECK(rows + 1 == static_cast<int>(res.trajectory.size()) * 2);
    std::remove("io_traj.csv");
}

TEST_CASE("metrics CSV header and row") {
    CHECK(metrics_csv_header() == "scenario_id,algo,k_or_kstar,t_rc,coverage_ratio,final_subnets");
    MetricsReport rep;
    rep.recovery_time = 7.5;
    rep.coverage_ratio = 0.25;
    rep.final_subnets = 1;
    std::string row = metrics_csv_row("scn-3", "apf", 3, rep);
    CHECK(row == "scn-3,apf,3,7.5,0.25,1");
}

TEST_CASE("degree CDF CSV") {
    save_degree_cdf_csv("s1", {{0, 0.0}, {1, 0.5}, {2, 1.0}}, "io_cdf.csv");
    std::string text = slurp("io_cdf.csv");
    CHECK(text == "scenario_id,d,P_d\ns1,0,0\ns1,1,0.5\ns1,2,1\n");
    std::remove("io_cdf.csv");
}

TEST_CASE("recovery SVG is written and well-formed at the shallow level") {
    ScenarioFile sf = sample_scenario();
    Usnet u = sf.regenerate_usnet();
    DamageScenario s = sf.scenario(u.size());
    RecoveryResult res = apf_recover(u, s, 3, true);
    save_recovery_svg(res, remaining_positions(u, s), u.config, "io_fig.svg");
    std::string text = slurp("io_fig.svg");
    CHECK(text.find("<svg") == 0);
    CHECK(text.rfind("</svg>\n") == text.size() - 7);
    CHECK(text.find("<circle") != std::string::npos);
    std::remove("io_fig.svg");
}
