#include "ncdoa/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

namespace ncdoa {

using nlohmann::json;

namespace {

void check_object(const json& j, const char* context) {
    if (!j.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* context) {
    check_object(j, context);
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& j, const char* key, const char* context) {
    if (!j.contains(key)) throw ConfigError(std::string(context) + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(context) + ": bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const char* context) {
    return j.contains(key) ? get<T>(j, key, context) : fallback;
}

void check_version(const json& j, const char* context) {
    if (j.contains("schema_version") && get<int>(j, "schema_version", context) != kSchemaVersion) {
        throw ConfigError(std::string(context) + ": unsupported schema_version");
    }
}

double snr_from_json(const json& j, const char* context) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "noiseless") return std::numeric_limits<double>::infinity();
        throw ConfigError(std::string(context) + ": snr_db must be a number or \"inf\"");
    }
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    if (!j.is_number()) throw ConfigError(std::string(context) + ": snr_db must be a number or \"inf\"");
    return j.get<double>();
}

json snr_to_json(double snr_db) {
    if (std::isinf(snr_db)) return "inf";
    return snr_db;
}

PhaseModel phase_model_from_string(const std::string& s) {
    if (s == "per_snapshot") return PhaseModel::PerSnapshot;
    if (s == "calibrated") return PhaseModel::CalibratedConstant;
    throw ConfigError("phase_model must be \"per_snapshot\" or \"calibrated\"");
}

ArrayGeometry base_geometry_from_json(const json& j) {
    const auto kind = get<std::string>(j, "kind", "geometry");
    try {
        if (kind == "ula") return make_ula(get<int>(j, "n", "geometry"));
        if (kind == "mra") return make_mra(get<int>(j, "n", "geometry"));
        if (kind == "nested") return make_nested(get<int>(j, "n1", "geometry"), get<int>(j, "n2", "geometry"));
        if (kind == "positions") return ArrayGeometry(get<std::vector<int>>(j, "positions", "geometry"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
    throw ConfigError("geometry: unknown kind '" + kind + "' (ula, mra, nested, positions)");
}

} // namespace

SubarrayPartition partition_from_json(const json& j) {
    check_object(j, "geometry");
    try {
        if (j.contains("reference")) {
            check_keys(j, {"reference"}, "geometry");
            return reference_geometry(get<std::string>(j, "reference", "geometry")).partition;
        }
        if (j.contains("subarrays")) {
            check_keys(j, {"subarrays", "partition"}, "geometry");
            const auto kind_s = get_or<std::string>(j, "partition", "type1", "geometry");
            if (kind_s != "type1" && kind_s != "type2") throw ConfigError("geometry: partition must be type1 or type2");
            std::vector<ArrayGeometry> subs;
            for (const auto& s : get<std::vector<std::vector<int>>>(j, "subarrays", "geometry")) subs.emplace_back(s);
            return SubarrayPartition(std::move(subs), kind_s == "type1" ? PartitionKind::TypeI : PartitionKind::TypeII);
        }
        check_keys(j, {"kind", "n", "n1", "n2", "positions", "split", "type2"}, "geometry");
        const ArrayGeometry base = base_geometry_from_json(j);
        if (j.contains("split") && j.contains("type2")) throw ConfigError("geometry: use either split or type2");
        if (j.contains("type2")) {
            const json& t2 = j.at("type2");
            check_keys(t2, {"l", "mu"}, "geometry.type2");
            return type2_build(base, get<int>(t2, "l", "geometry.type2"), get<int>(t2, "mu", "geometry.type2"));
        }
        std::vector<int> sizes = get_or<std::vector<int>>(j, "split", {static_cast<int>(base.size())}, "geometry");
        return type1_split(base, sizes);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
}

json partition_to_json(const SubarrayPartition& partition) {
    json subs = json::array();
    for (const auto& s : partition.subarrays()) subs.push_back(s.positions());
    return {{"partition", to_string(partition.kind())},
            {"subarrays", subs},
            {"positions", partition.union_geometry().positions()}};
}

json weights_to_json(const WeightFunction& w) {
    json lags = json::array(), counts = json::array();
    for (int n = -w.max_lag(); n <= w.max_lag(); ++n) {
        if (w.at(n) == 0) continue;
        lags.push_back(n);
        counts.push_back(w.at(n));
    }
    return {{"lags", lags}, {"counts", counts}, {"dof", w.support_size()}, {"hole_free", w.hole_free()}};
}

EstimatorOptions estimator_from_json(const json& j) {
    check_keys(j, {"c", "m", "epsilon", "peaks", "weight_by_singular_value", "workers", "solver"}, "estimator");
    EstimatorOptions o;
    o.c_const = get_or(j, "c", o.c_const, "estimator");
    o.m_const = get_or(j, "m", o.m_const, "estimator");
    o.epsilon = get_or(j, "epsilon", o.epsilon, "estimator");
    o.weight_by_singular_value = get_or(j, "weight_by_singular_value", o.weight_by_singular_value, "estimator");
    o.workers = get_or(j, "workers", o.workers, "estimator");
    const auto peaks = get_or<std::string>(j, "peaks", "top_d", "estimator");
    if (peaks == "top_d") {
        o.peaks = PeakSelection::TopD;
    } else if (peaks == "local_maxima") {
        o.peaks = PeakSelection::LocalMaxima;
    } else {
        throw ConfigError("estimator: peaks must be \"top_d\" or \"local_maxima\"");
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, {"rho", "max_iter", "tol_primal", "tol_dual", "over_relaxation", "adaptive_rho"}, "solver");
        o.solver.rho = get_or(s, "rho", o.solver.rho, "solver");
        o.solver.max_iter = get_or(s, "max_iter", o.solver.max_iter, "solver");
        o.solver.tol_primal = get_or(s, "tol_primal", o.solver.tol_primal, "solver");
        o.solver.tol_dual = get_or(s, "tol_dual", o.solver.tol_dual, "solver");
        o.solver.over_relaxation = get_or(s, "over_relaxation", o.solver.over_relaxation, "solver");
        o.solver.adaptive_rho = get_or(s, "adaptive_rho", o.solver.adaptive_rho, "solver");
    }
    if (!(o.c_const > 0.0) || o.m_const < 0 || !(o.epsilon >= 0.0)) {
        throw ConfigError("estimator: need c > 0, m >= 0, epsilon >= 0");
    }
    try {
        o.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return o;
}

json estimator_to_json(const EstimatorOptions& o) {
    return {{"c", o.c_const},
            {"m", o.m_const},
            {"epsilon", o.epsilon},
            {"peaks", o.peaks == PeakSelection::TopD ? "top_d" : "local_maxima"},
            {"weight_by_singular_value", o.weight_by_singular_value},
            {"workers", o.workers},
            {"solver",
             {{"rho", o.solver.rho},
              {"max_iter", o.solver.max_iter},
              {"tol_primal", o.solver.tol_primal},
              {"tol_dual", o.solver.tol_dual},
              {"over_relaxation", o.solver.over_relaxation},
              {"adaptive_rho", o.solver.adaptive_rho}}}};
}

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j,
               {"schema_version", "geometry", "true_dirs", "grid", "snr_db", "snapshots", "phase_model", "seed",
                "d_sources", "data_file", "noise_var", "estimator"},
               "scenario");
    check_version(j, "scenario");
    if (!j.contains("geometry")) throw ConfigError("scenario: missing key 'geometry'");

    Grid grid;
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"step", "points"}, "grid");
        try {
            if (g.contains("points")) {
                grid = Grid(get<std::vector<double>>(g, "points", "grid"));
            } else {
                grid = Grid::uniform(get<double>(g, "step", "grid"));
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    } else {
        grid = Grid::uniform(0.01);
    }

    Scenario sc{partition_from_json(j.at("geometry")),
                get<std::vector<double>>(j, "true_dirs", "scenario"),
                grid,
                j.contains("snr_db") ? snr_from_json(j.at("snr_db"), "scenario") : 10.0,
                get_or(j, "snapshots", 1, "scenario"),
                phase_model_from_string(get_or<std::string>(j, "phase_model", "per_snapshot", "scenario")),
                get_or<std::uint64_t>(j, "seed", 0, "scenario")};
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    ScenarioConfig cfg{std::move(sc), 0, {}, std::nullopt, std::nullopt};
    cfg.d_sources = get_or<std::size_t>(j, "d_sources", cfg.scenario.true_dirs.size(), "scenario");
    if (cfg.d_sources == 0 || cfg.d_sources > cfg.scenario.grid.size()) {
        throw ConfigError("scenario: d_sources must be in [1, grid size]");
    }
    if (j.contains("estimator")) cfg.estimator = estimator_from_json(j.at("estimator"));
    if (j.contains("data_file")) {
        std::filesystem::path p = get<std::string>(j, "data_file", "scenario");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        cfg.data_file = p;
    }
    if (j.contains("noise_var")) {
        const double nv = get<double>(j, "noise_var", "scenario");
        if (!(nv >= 0.0)) throw ConfigError("scenario: noise_var must be >= 0");
        cfg.noise_var = nv;
    }
    return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    json p = partition_to_json(sc.partition);
    json j = {{"schema_version", kSchemaVersion},
              {"geometry", {{"subarrays", p["subarrays"]}, {"partition", p["partition"]}}},
              {"true_dirs", sc.true_dirs},
              {"grid", {{"points", sc.grid.points()}}},
              {"snr_db", snr_to_json(sc.snr_db)},
              {"snapshots", sc.snapshots},
              {"phase_model", to_string(sc.phase_model)},
              {"seed", sc.seed},
              {"d_sources", cfg.d_sources},
              {"estimator", estimator_to_json(cfg.estimator)}};
    if (cfg.data_file) j["data_file"] = cfg.data_file->string();
    if (cfg.noise_var) j["noise_var"] = *cfg.noise_var;
    return j;
}

namespace {

CampaignConfig campaign_from_object(const json& j, std::size_t index) {
    check_keys(j,
               {"schema_version", "name", "geometries", "sweep", "runs", "true_dirs", "grid_step", "snr_db",
                "snapshots", "phase_model", "seed", "workers", "estimator"},
               "campaign");
    check_version(j, "campaign");
    CampaignConfig cfg;
    cfg.name = get_or<std::string>(j, "name", "campaign_" + std::to_string(index), "campaign");
    Campaign& c = cfg.campaign;
    if (j.contains("geometries")) {
        const json& gs = j.at("geometries");
        if (!gs.is_array()) throw ConfigError("campaign: geometries must be an array");
        for (const auto& g : gs) {
            if (g.is_string()) {
                try {
                    c.geometries.push_back(reference_geometry(g.get<std::string>()));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("campaign: ") + e.what());
                }
            } else {
                check_keys(g, {"name", "geometry"}, "campaign.geometries");
                c.geometries.push_back(
                    {get<std::string>(g, "name", "campaign.geometries"), partition_from_json(g.at("geometry"))});
            }
        }
    } else {
        c.geometries = reference_geometries();
    }

    if (!j.contains("sweep")) throw ConfigError("campaign: missing key 'sweep'");
    const json& sw = j.at("sweep");
    check_keys(sw, {"variable", "values"}, "sweep");
    const auto var = get<std::string>(sw, "variable", "sweep");
    if (var == "snr_db") {
        c.sweep.variable = SweepVariable::Snr;
    } else if (var == "snapshots") {
        c.sweep.variable = SweepVariable::Snapshots;
    } else {
        throw ConfigError("sweep: variable must be \"snr_db\" or \"snapshots\"");
    }
    c.sweep.values = get<std::vector<double>>(sw, "values", "sweep");

    c.runs = get_or(j, "runs", c.runs, "campaign");
    c.true_dirs = get_or(j, "true_dirs", c.true_dirs, "campaign");
    c.grid_step = get_or(j, "grid_step", c.grid_step, "campaign");
    if (j.contains("snr_db")) c.snr_db = snr_from_json(j.at("snr_db"), "campaign");
    c.snapshots = get_or(j, "snapshots", c.snapshots, "campaign");
    c.phase_model = phase_model_from_string(get_or<std::string>(j, "phase_model", "per_snapshot", "campaign"));
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "campaign");
    c.workers = get_or(j, "workers", c.workers, "campaign");
    if (j.contains("estimator")) {
        json est = j.at("estimator");
        if (!est.contains("peaks")) est["peaks"] = "local_maxima";
        c.estimator = estimator_from_json(est);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

} // namespace

std::vector<CampaignConfig> campaigns_from_json(const json& j) {
    check_object(j, "campaign file");
    std::vector<CampaignConfig> out;
    if (j.contains("campaigns")) {
        check_keys(j, {"schema_version", "campaigns"}, "campaign file");
        check_version(j, "campaign file");
        const json& list = j.at("campaigns");
        if (!list.is_array() || list.empty()) throw ConfigError("campaign file: campaigns must be a non-empty array");
        for (std::size_t i = 0; i < list.size(); ++i) out.push_back(campaign_from_object(list[i], i));
    } else {
        out.push_back(campaign_from_object(j, 0));
    }
    return out;
}

json campaign_to_json(const CampaignConfig& cfg) {
    const Campaign& c = cfg.campaign;
    json geoms = json::array();
    for (const auto& g : c.geometries) {
        json p = partition_to_json(g.partition);
        geoms.push_back({{"name", g.name}, {"geometry", {{"subarrays", p["subarrays"]}, {"partition", p["partition"]}}}});
    }
    return {{"schema_version", kSchemaVersion},
            {"name", cfg.name},
            {"geometries", geoms},
            {"sweep", {{"variable", to_string(c.sweep.variable)}, {"values", c.sweep.values}}},
            {"runs", c.runs},
            {"true_dirs", c.true_dirs},
            {"grid_step", c.grid_step},
            {"snr_db", snr_to_json(c.snr_db)},
            {"snapshots", c.snapshots},
            {"phase_model", to_string(c.phase_model)},
            {"seed", c.seed},
            {"workers", c.workers},
            {"estimator", estimator_to_json(c.estimator)}};
}

json estimate_to_json(const EstimateResult& result) {
    const auto& d = result.diagnostics;
    json statuses = json::array();
    for (auto s : d.statuses) statuses.push_back(to_string(s));
    return {{"schema_version", kSchemaVersion},
            {"estimated_dirs", result.estimate.estimated_dirs},
            {"support", result.estimate.support},
            {"diagnostics",
             {{"solver_status", statuses},
              {"iterations", d.iterations},
              {"max_iter_count", d.max_iter_count},
              {"infeasible_count", d.infeasible_count},
              {"degenerate_count", d.degenerate_count}}}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

namespace {

json geometry_schema() {
    return json::parse(R"({
      "description": "Array geometry and its split into subarrays",
      "oneOf": [
        {"type": "object", "required": ["reference"], "additionalProperties": false,
         "properties": {"reference": {"enum": ["ULA-12", "TypeI-MRA", "TypeII-MRA", "TypeI-NAQ2", "TypeII-NAQ2"]}}},
        {"type": "object", "required": ["subarrays"], "additionalProperties": false,
         "properties": {"subarrays": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
                        "partition": {"enum": ["type1", "type2"]}}},
        {"type": "object", "required": ["kind"], "additionalProperties": false,
         "properties": {"kind": {"enum": ["ula", "mra", "nested", "positions"]},
                        "n": {"type": "integer", "minimum": 1},
                        "n1": {"type": "integer", "minimum": 1},
                        "n2": {"type": "integer", "minimum": 1},
                        "positions": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "split": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                        "type2": {"type": "object", "additionalProperties": false, "required": ["l", "mu"],
                                  "properties": {"l": {"type": "integer", "minimum": 1},
                                                 "mu": {"type": "integer", "minimum": 1}}}}}
      ]
    })");
}

json estimator_schema() {
    return json::parse(R"({
      "type": "object", "additionalProperties": false,
      "properties": {
        "c": {"type": "number", "exclusiveMinimum": 0, "default": 2.0},
        "m": {"type": "integer", "minimum": 0, "default": 0, "description": "0 = total sensor count"},
        "epsilon": {"type": "number", "minimum": 0, "default": 1.0},
        "peaks": {"enum": ["top_d", "local_maxima"]},
        "weight_by_singular_value": {"type": "boolean", "default": false},
        "workers": {"type": "integer", "minimum": 0},
        "solver": {"type": "object", "additionalProperties": false,
          "properties": {"rho": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
                         "max_iter": {"type": "integer", "minimum": 1, "default": 5000},
                         "tol_primal": {"type": "number", "exclusiveMinimum": 0, "default": 1e-6},
                         "tol_dual": {"type": "number", "exclusiveMinimum": 0, "default": 1e-6},
                         "over_relaxation": {"type": "number", "minimum": 1, "maximum": 1.8, "default": 1.0},
                         "adaptive_rho": {"type": "boolean", "default": true}}}
      }
    })");
}

json snr_schema() {
    return json::parse(R"({"oneOf": [{"type": "number"}, {"enum": ["inf", "noiseless"]}, {"type": "null"}]})");
}

} // namespace

json scenario_schema() {
    json s = json::parse(R"({
      "$schema": "https://json-schema.org/draft/2020-12/schema",
      "title": "ncdoa scenario",
      "type": "object", "additionalProperties": false,
      "required": ["geometry", "true_dirs"],
      "properties": {
        "schema_version": {"const": 1},
        "true_dirs": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": -1, "exclusiveMaximum": 1}},
        "grid": {"type": "object", "additionalProperties": false,
                 "properties": {"step": {"type": "number", "exclusiveMinimum": 0},
                                "points": {"type": "array", "items": {"type": "number"}}}},
        "snapshots": {"type": "integer", "minimum": 1, "default": 1},
        "phase_model": {"enum": ["per_snapshot", "calibrated"], "default": "per_snapshot"},
        "seed": {"type": "integer", "minimum": 0, "default": 0},
        "d_sources": {"type": "integer", "minimum": 1},
        "data_file": {"type": "string", "description": "observation CSV (t,row,re,im) to use instead of synthesis"},
        "noise_var": {"type": "number", "minimum": 0}
      }
    })");
    s["properties"]["geometry"] = geometry_schema();
    s["properties"]["snr_db"] = snr_schema();
    s["properties"]["estimator"] = estimator_schema();
    return s;
}

json campaign_schema() {
    json one = json::parse(R"({
      "type": "object", "additionalProperties": false,
      "required": ["sweep"],
      "properties": {
        "schema_version": {"const": 1},
        "name": {"type": "string", "description": "output file stem"},
        "sweep": {"type": "object", "additionalProperties": false, "required": ["variable", "values"],
                  "properties": {"variable": {"enum": ["snr_db", "snapshots"]},
                                 "values": {"type": "array", "minItems": 1, "items": {"type": "number"}}}},
        "runs": {"type": "integer", "minimum": 1, "default": 50},
        "true_dirs": {"type": "array", "items": {"type": "number"}, "default": [0, 0.2, 0.4, 0.6, 0.8]},
        "grid_step": {"type": "number", "exclusiveMinimum": 0, "default": 0.01},
        "snapshots": {"type": "integer", "minimum": 1, "default": 10},
        "phase_model": {"enum": ["per_snapshot", "calibrated"]},
        "seed": {"type": "integer", "minimum": 0, "default": 1},
        "workers": {"type": "integer", "minimum": 0}
      }
    })");
    json geom_item = json::object();
    geom_item["oneOf"] = json::array(
        {json{{"type", "string"}},
         json{{"type", "object"},
              {"additionalProperties", false},
              {"required", {"name", "geometry"}},
              {"properties", {{"name", {{"type", "string"}}}, {"geometry", geometry_schema()}}}}});
    one["properties"]["geometries"] = {{"type", "array"}, {"items", geom_item}};
    one["properties"]["snr_db"] = snr_schema();
    one["properties"]["estimator"] = estimator_schema();

    json s = {{"$schema", "https://json-schema.org/draft/2020-12/schema"}, {"title", "ncdoa campaign"}};
    s["oneOf"] = json::array(
        {one, json{{"type", "object"},
                   {"additionalProperties", false},
                   {"required", {"campaigns"}},
                   {"properties", {{"schema_version", {{"const", 1}}},
                                   {"campaigns", {{"type", "array"}, {"minItems", 1}, {"items", one}}}}}}});
    return s;
}

} // namespace ncdoa
