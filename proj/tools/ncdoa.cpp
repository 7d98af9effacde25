// ncdoa command-line tool: geometry inspection, bound checks, estimation and benchmarks.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ncdoa/bench.hpp"
#include "ncdoa/config.hpp"
#include "ncdoa/errors.hpp"
#include "ncdoa/estimator.hpp"
#include "ncdoa/geometry.hpp"
#include "ncdoa/signal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ncdoa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitNonConvergence = 4;

struct GeometryArgs {
    std::string kind = "mra";
    int n = 0, n1 = 0, n2 = 0;
    std::vector<int> positions;
    std::vector<int> split;
    bool type2 = false;
    int l = 2, mu = 1;
};

void add_geometry_flags(CLI::App* cmd, GeometryArgs& g) {
    cmd->add_option("--kind", g.kind, "ula | mra | nested | positions")
        ->check(CLI::IsMember({"ula", "mra", "nested", "positions"}));
    cmd->add_option("--n", g.n, "sensor count (ula, mra)");
    cmd->add_option("--n1", g.n1, "inner ULA size (nested)");
    cmd->add_option("--n2", g.n2, "outer stage size (nested)");
    cmd->add_option("--positions", g.positions, "explicit sensor positions (kind positions)");
}

json geometry_json(const GeometryArgs& g) {
    json j = {{"kind", g.kind}};
    if (g.kind == "ula" || g.kind == "mra") j["n"] = g.n;
    if (g.kind == "nested") {
        j["n1"] = g.n1;
        j["n2"] = g.n2;
    }
    if (g.kind == "positions") j["positions"] = g.positions;
    if (!g.split.empty()) j["split"] = g.split;
    if (g.type2) j["type2"] = {{"l", g.l}, {"mu", g.mu}};
    return j;
}

std::string set_string(const std::vector<int>& v) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '}';
    return os.str();
}

int cmd_geometry(const GeometryArgs& g, bool weights) {
    const SubarrayPartition p = partition_from_json(geometry_json(g));
    json out = partition_to_json(p);
    out["set"] = set_string(p.union_geometry().positions());
    json subs = json::array();
    for (const auto& s : p.subarrays()) subs.push_back(s.to_string());
    out["subarray_sets"] = subs;
    if (weights) {
        out["weights"] = weights_to_json(weight_function(p.union_geometry()));
        out["dof"] = dof(p.union_geometry());
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
}

int cmd_verify_theorem(const GeometryArgs& g, bool explicit_geometry, const std::vector<int>& ls, int mu_max) {
    std::vector<std::pair<std::string, ArrayGeometry>> refs;
    if (explicit_geometry) {
        GeometryArgs base = g;
        base.split.clear();
        base.type2 = false;
        refs.emplace_back(g.kind, partition_from_json(geometry_json(base)).union_geometry());
    } else {
        for (int n : {3, 4, 5}) refs.emplace_back("mra(" + std::to_string(n) + ")", make_mra(n));
        refs.emplace_back("nested(2,2)", make_nested(2, 2));
        refs.emplace_back("nested(3,3)", make_nested(3, 3));
    }
    int violations = 0;
    std::cout << std::left << std::setw(14) << "subarray" << std::setw(4) << "L" << std::setw(5) << "mu" << std::setw(7)
              << "kappa" << std::setw(6) << "sdof" << std::setw(6) << "dof" << std::setw(7) << "bound" << std::setw(8)
              << "kind" << std::setw(10) << "identity" << "status\n";
    for (const auto& [name, ref] : refs) {
        const int sdof = dof(ref);
        const int kappa = (sdof - 1) / 2;
        const int top = mu_max > 0 ? mu_max : 2 * kappa + 2;
        for (int l : ls) {
            for (int mu = 1; mu <= top; ++mu) {
                const Theorem1Report r = verify_theorem1(ref, l, mu);
                const bool ok = r.satisfied && r.shift_identity_holds;
                violations += ok ? 0 : 1;
                std::cout << std::setw(14) << name << std::setw(4) << l << std::setw(5) << mu << std::setw(7) << kappa
                          << std::setw(6) << r.subarray_dof << std::setw(6) << r.bruteforce_dof << std::setw(7)
                          << r.bound.value << std::setw(8)
                          << (r.bound.kind == BoundKind::Exact ? "exact" : "upper") << std::setw(10)
                          << (r.shift_identity_holds ? "yes" : "no") << (ok ? "satisfied" : "VIOLATED") << '\n';
            }
        }
    }
    std::cout << (violations == 0 ? "all cases satisfied\n" : std::to_string(violations) + " violation(s)\n");
    return violations == 0 ? kExitOk : kExitViolation;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

struct EstimateArgs {
    std::string scenario;
    int t = 0;
    std::string spectrum, out, dump;
    bool strict = false;
};

int cmd_estimate(const EstimateArgs& a) {
    const fs::path path = a.scenario;
    ScenarioConfig cfg = scenario_from_json(read_json_file(path), path.parent_path());
    Scenario& sc = cfg.scenario;
    if (a.t > 0) sc.snapshots = a.t;

    CMatrix obs;
    double noise_var = 0.0;
    json out;
    if (cfg.data_file) {
        obs = read_observations_csv(*cfg.data_file);
        if (obs.rows() != static_cast<Eigen::Index>(sc.partition.total_sensors())) {
            throw ConfigError("data_file rows do not match the geometry sensor count");
        }
        if (a.t > 0) {
            if (a.t > obs.cols()) throw ConfigError("--t exceeds the snapshots in data_file");
            obs = obs.leftCols(a.t).eval();
        }
        noise_var = cfg.noise_var.value_or(sc.noise_variance());
    } else {
        const SnapshotData data = synthesize(sc);
        obs = data.observations;
        noise_var = data.noise_var;
        if (!a.dump.empty()) write_snapshot_csv(data, a.dump);
    }

    EstimateResult res;
    try {
        res = estimate(obs, noise_var, sc.grid, sc.partition, cfg.d_sources, cfg.estimator);
    } catch (const EstimationFailed& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    }
    out = estimate_to_json(res);
    out["snapshots"] = obs.cols();
    out["noise_var"] = noise_var;
    if (!cfg.data_file) {
        std::vector<double> truth = sc.true_dirs;
        std::sort(truth.begin(), truth.end());
        out["true_dirs"] = truth;
        if (truth.size() == res.estimate.estimated_dirs.size()) {
            out["rmse"] = rmse(truth, {res.estimate.estimated_dirs});
        }
    }
    if (a.out.empty()) {
        std::cout << out.dump(2) << '\n';
    } else {
        write_text(a.out, out.dump(2) + "\n");
    }
    if (!a.spectrum.empty()) {
        std::ostringstream os;
        os << "theta,spectrum\n" << std::setprecision(12);
        for (std::size_t i = 0; i < sc.grid.size(); ++i) {
            os << sc.grid[i] << ',' << res.estimate.pseudo_spectrum(static_cast<Eigen::Index>(i)) << '\n';
        }
        write_text(a.spectrum, os.str());
    }
    const auto& d = res.diagnostics;
    if (d.max_iter_count > 0 || d.infeasible_count > 0) {
        std::cerr << "warning: " << d.max_iter_count << " solve(s) hit max_iter, " << d.infeasible_count
                  << " infeasible\n";
        if (a.strict) return kExitNonConvergence;
    }
    return kExitOk;
}

const char* kPlotScript = R"PY(import sys
import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

# usage: python plot.py results.csv [more.csv ...]
for path in sys.argv[1:]:
    df = pd.read_csv(path)
    fig, ax = plt.subplots()
    if "theta" in df.columns:
        for col in df.columns[1:]:
            ax.plot(df["theta"], 10 * np.log10(df[col].clip(lower=1e-12)), label=col)
        ax.set_xlabel("theta")
        ax.set_ylabel("beampattern (dB)")
        ax.set_ylim(-40, 1)
    else:
        var = df["sweep_var"].iloc[0]
        for name, g in df.groupby("name", sort=False):
            ax.semilogy(g["sweep_value"], g["rmse"], marker="o", label=name)
        ax.set_xlabel(var)
        ax.set_ylabel("RMSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150, bbox_inches="tight")
)PY";

struct BenchArgs {
    std::string campaign;
    std::string out = "bench_out";
    std::string preset;
    int runs = 0;
    int workers = -1;
    bool beampattern = false;
    bool plot = false;
};

int cmd_bench(const BenchArgs& a) {
    std::vector<CampaignConfig> configs;
    if (!a.preset.empty()) {
        if (a.preset != "paper") throw ConfigError("unknown preset '" + a.preset + "' (paper)");
        configs.push_back({"snr_sweep", reference_snr_campaign()});
        configs.push_back({"snapshot_sweep", reference_snapshot_campaign()});
    } else {
        if (a.campaign.empty()) throw ConfigError("bench needs a campaign file or --preset");
        configs = campaigns_from_json(read_json_file(a.campaign));
    }
    const fs::path out_dir = a.out;
    fs::create_directories(out_dir);

    std::vector<NamedPartition> all_geoms;
    for (auto& cfg : configs) {
        if (a.runs > 0) cfg.campaign.runs = a.runs;
        if (a.workers >= 0) cfg.campaign.workers = static_cast<unsigned>(a.workers);
        std::cerr << "running " << cfg.name << " (" << cfg.campaign.geometries.size() << " geometries x "
                  << cfg.campaign.sweep.values.size() << " values x " << cfg.campaign.runs << " runs)\n";
        const CampaignResult res = run_campaign(cfg.campaign);
        const std::string csv = res.to_csv();
        write_text(out_dir / (cfg.name + ".csv"), csv);
        write_text(out_dir / (cfg.name + "_timing.csv"), res.timing_csv());
        std::cout << "# " << cfg.name << '\n' << csv;
        for (const auto& g : cfg.campaign.geometries) {
            bool seen = false;
            for (const auto& h : all_geoms) seen = seen || h.name == g.name;
            if (!seen) all_geoms.push_back(g);
        }
    }
    if (a.beampattern) {
        write_text(out_dir / "beampattern.csv", beampattern_csv(all_geoms, Grid::uniform(0.001)));
        std::cout << "# beampattern written to " << (out_dir / "beampattern.csv").string() << '\n';
    }
    if (a.plot) write_text(out_dir / "plot.py", kPlotScript);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noncoherent sparse-array DOA estimation toolkit"};
    app.require_subcommand(0, 1);
    bool schema = false;
    app.add_flag("--schema", schema, "print the JSON schemas of scenario and campaign files");

    GeometryArgs geo;
    bool weights = false;
    auto* g_cmd = app.add_subcommand("geometry", "build an array and print its partition as JSON");
    add_geometry_flags(g_cmd, geo);
    g_cmd->add_option("--split", geo.split, "order-preserving split into subarray sizes");
    g_cmd->add_flag("--type2", geo.type2, "union of translated copies of the array");
    g_cmd->add_option("--l", geo.l, "number of copies for --type2");
    g_cmd->add_option("--mu", geo.mu, "extra translation beyond the aperture for --type2");
    g_cmd->add_flag("--weights", weights, "also print the weight function and DoF");

    GeometryArgs vgeo;
    std::vector<int> ls{2, 3};
    int mu_max = 0;
    auto* v_cmd = app.add_subcommand("verify-theorem", "check the translated-union DoF bound over l and mu");
    add_geometry_flags(v_cmd, vgeo);
    v_cmd->add_option("--l", ls, "subarray counts to sweep");
    v_cmd->add_option("--mu-max", mu_max, "largest mu (default 2*kappa+2)");

    EstimateArgs est;
    auto* e_cmd = app.add_subcommand("estimate", "run the estimator on a scenario file");
    e_cmd->add_option("scenario", est.scenario, "scenario JSON")->required();
    e_cmd->add_option("--t", est.t, "override the snapshot count (1 = single snapshot)");
    e_cmd->add_option("--spectrum", est.spectrum, "write the pseudo-spectrum CSV here");
    e_cmd->add_option("--out", est.out, "write the result JSON here instead of stdout");
    e_cmd->add_option("--dump-data", est.dump, "write synthesized data to <stem>_obs.csv / <stem>_phases.csv");
    e_cmd->add_flag("--strict", est.strict, "exit 4 if any solve fails to converge");

    BenchArgs bench;
    auto* b_cmd = app.add_subcommand("bench", "run Monte Carlo campaigns and write CSV results");
    b_cmd->add_option("campaign", bench.campaign, "campaign JSON");
    b_cmd->add_option("--out", bench.out, "output directory");
    b_cmd->add_option("--preset", bench.preset, "built-in campaign set (paper)");
    b_cmd->add_option("--runs", bench.runs, "override runs per point");
    b_cmd->add_option("--workers", bench.workers, "worker threads (0 = NCDOA_WORKERS or hardware)");
    b_cmd->add_flag("--beampattern", bench.beampattern, "also write beampattern.csv on a 0.001 grid");
    b_cmd->add_flag("--plot", bench.plot, "also write a matplotlib plot.py");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (schema) {
            std::cout << json{{"scenario", scenario_schema()}, {"campaign", campaign_schema()}}.dump(2) << '\n';
            return kExitOk;
        }
        if (g_cmd->parsed()) return cmd_geometry(geo, weights);
        if (v_cmd->parsed()) return cmd_verify_theorem(vgeo, v_cmd->count("--kind") > 0, ls, mu_max);
        if (e_cmd->parsed()) return cmd_estimate(est);
        if (b_cmd->parsed()) return cmd_bench(bench);
        std::cout << app.help();
        return kExitInput;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimation;
    }
}
