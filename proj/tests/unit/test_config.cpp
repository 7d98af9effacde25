#include <catch_amalgamated.hpp>

#include <cmath>

#include "ncdoa/config.hpp"

using namespace ncdoa;
using nlohmann::json;

TEST_CASE("geometry documents", "[config]") {
    auto p = partition_from_json(json::parse(R"({"kind": "mra", "n": 10, "split": [5, 5]})"));
    CHECK(p.subarray(1).positions() == std::vector<int>{20, 27, 31, 35, 36});
    p = partition_from_json(json::parse(R"({"kind": "mra", "n": 5, "type2": {"l": 2, "mu": 1}})"));
    CHECK(p.subarray(1).positions() == std::vector<int>{10, 11, 14, 17, 19});
    p = partition_from_json(json::parse(R"({"reference": "ULA-12"})"));
    CHECK(p.total_sensors() == 12);
    p = partition_from_json(json::parse(R"({"subarrays": [[0, 2], [5, 6]], "partition": "type2"})"));
    CHECK(p.kind() == PartitionKind::TypeII);
    p = partition_from_json(json::parse(R"({"kind": "ula", "n": 4})"));
    CHECK(p.count() == 1);

    CHECK_THROWS_AS(partition_from_json(json::parse(R"({"kind": "mra", "n": 99})")), ConfigError);
    CHECK_THROWS_AS(partition_from_json(json::parse(R"({"kind": "hex", "n": 3})")), ConfigError);
    CHECK_THROWS_AS(partition_from_json(json::parse(R"({"kind": "ula", "n": 3, "colour": 1})")), ConfigError);
    CHECK_THROWS_AS(partition_from_json(json::parse(R"({"kind": "ula", "n": "three"})")), ConfigError);
    CHECK_THROWS_AS(partition_from_json(json::parse(R"({"kind": "ula", "n": 4, "split": [1, 1]})")), ConfigError);
    CHECK_THROWS_AS(partition_from_json(json::parse(R"([1, 2])")), ConfigError);
}

TEST_CASE("scenario documents", "[config]") {
    const auto cfg = scenario_from_json(json::parse(R"({
        "schema_version": 1,
        "geometry": {"reference": "TypeII-MRA"},
        "true_dirs": [0.0, 0.4],
        "grid": {"step": 0.05},
        "snr_db": "inf",
        "snapshots": 3,
        "phase_model": "calibrated",
        "seed": 12,
        "estimator": {"epsilon": 0.5, "peaks": "local_maxima", "solver": {"max_iter": 100}}
    })"));
    CHECK(cfg.scenario.grid.size() == 40);
    CHECK(std::isinf(cfg.scenario.snr_db));
    CHECK(cfg.scenario.phase_model == PhaseModel::CalibratedConstant);
    CHECK(cfg.scenario.seed == 12);
    CHECK(cfg.d_sources == 2);
    CHECK(cfg.estimator.epsilon == 0.5);
    CHECK(cfg.estimator.peaks == PeakSelection::LocalMaxima);
    CHECK(cfg.estimator.solver.max_iter == 100);
    CHECK_FALSE(cfg.data_file.has_value());

    // Round trip through the writer.
    const auto again = scenario_from_json(scenario_to_json(cfg));
    CHECK(again.scenario.grid.points() == cfg.scenario.grid.points());
    CHECK(again.scenario.partition.union_geometry() == cfg.scenario.partition.union_geometry());
    CHECK(again.estimator.epsilon == 0.5);

    const auto with_file = scenario_from_json(
        json::parse(R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "data_file": "obs.csv"})"), "/data");
    REQUIRE(with_file.data_file.has_value());
    CHECK(*with_file.data_file == std::filesystem::path("/data/obs.csv"));
}

TEST_CASE("scenario documents are validated", "[config]") {
    const char* bad[] = {
        R"({"true_dirs": [0.1]})",
        R"({"geometry": {"kind": "ula", "n": 4}})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "speed": 3})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [1.5]})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "snr_db": "loud"})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "schema_version": 7})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "phase_model": "random"})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "estimator": {"peaks": "best"}})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "estimator": {"solver": {"rho": -1}}})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "grid": {"step": 0}})",
        R"({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "d_sources": 0})",
    };
    for (const char* doc : bad) {
        INFO(doc);
        CHECK_THROWS_AS(scenario_from_json(json::parse(doc)), ConfigError);
    }
}

TEST_CASE("campaign documents", "[config]") {
    const auto one = campaigns_from_json(json::parse(R"({
        "name": "mine",
        "geometries": ["TypeII-MRA", {"name": "U8", "geometry": {"kind": "ula", "n": 8, "split": [4, 4]}}],
        "sweep": {"variable": "snapshots", "values": [1, 2]},
        "runs": 4
    })"));
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "mine");
    CHECK(one[0].campaign.geometries[1].name == "U8");
    CHECK(one[0].campaign.sweep.variable == SweepVariable::Snapshots);
    CHECK(one[0].campaign.runs == 4);
    CHECK(one[0].campaign.estimator.peaks == PeakSelection::LocalMaxima);

    const auto many = campaigns_from_json(read_json_file(NCDOA_EXAMPLES_DIR "/campaigns.json"));
    REQUIRE(many.size() == 2);
    CHECK(many[0].name == "snr_sweep");
    CHECK(many[1].campaign.sweep.values.size() == 5);
    CHECK(many[0].campaign.geometries.size() == 5);

    const auto back = campaigns_from_json(campaign_to_json(one[0]));
    CHECK(back[0].campaign.geometries[1].partition.union_geometry() == make_ula(8));

    CHECK_THROWS_AS(campaigns_from_json(json::parse(R"({"sweep": {"variable": "time", "values": [1]}})")),
                    ConfigError);
    CHECK_THROWS_AS(campaigns_from_json(json::parse(R"({"runs": 3})")), ConfigError);
    CHECK_THROWS_AS(campaigns_from_json(json::parse(R"({"campaigns": []})")), ConfigError);
    CHECK_THROWS_AS(campaigns_from_json(
                        json::parse(R"({"sweep": {"variable": "snr_db", "values": [1]}, "geometries": ["X"]})")),
                    ConfigError);
}

TEST_CASE("example configs parse", "[config]") {
    for (const char* f : {"noiseless.json", "paper_scenario.json"}) {
        INFO(f);
        CHECK_NOTHROW(scenario_from_json(read_json_file(std::string(NCDOA_EXAMPLES_DIR) + "/" + f)));
    }
    CHECK_NOTHROW(campaigns_from_json(read_json_file(NCDOA_EXAMPLES_DIR "/quick_campaign.json")));
    CHECK_THROWS_AS(read_json_file("/nonexistent/x.json"), ConfigError);
}

TEST_CASE("schemas are versioned", "[config]") {
    CHECK(scenario_schema()["properties"]["schema_version"]["const"] == kSchemaVersion);
    CHECK(campaign_schema().contains("oneOf"));
    CHECK(scenario_schema()["properties"].contains("geometry"));
}
