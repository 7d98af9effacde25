#include "ncdoa/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ncdoa/errors.hpp"
#include "ncdoa/parallel.hpp"

namespace ncdoa {

double rmse(std::span<const double> truth, const std::vector<std::vector<double>>& estimates) {
    if (truth.empty()) throw std::invalid_argument("rmse: empty truth");
    if (estimates.empty()) throw std::invalid_argument("rmse: no estimates");
    double acc = 0.0;
    for (const auto& est : estimates) {
        if (est.size() != truth.size()) throw std::invalid_argument("rmse: estimate length differs from truth");
        for (std::size_t k = 0; k < truth.size(); ++k) {
            const double e = truth[k] - est[k];
            acc += e * e;
        }
    }
    return std::sqrt(acc / static_cast<double>(truth.size() * estimates.size()));
}

RVector beampattern(const ArrayGeometry& array, const Grid& grid) {
    const CMatrix a = manifold(array, grid);
    const double n = static_cast<double>(array.size());
    return (a.colwise().sum().cwiseAbs2() / (n * n)).transpose();
}

double half_power_width(const RVector& pattern, const Grid& grid) {
    const auto g = static_cast<Eigen::Index>(grid.size());
    if (pattern.size() != g) throw std::invalid_argument("half_power_width: size mismatch");
    const Eigen::Index c = static_cast<Eigen::Index>(grid.nearest(0.0));
    constexpr double level = 0.5;
    auto crossing = [&](Eigen::Index inside, Eigen::Index outside) {
        const double p0 = pattern(inside), p1 = pattern(outside);
        const double f = (p0 - level) / (p0 - p1);
        return grid[static_cast<std::size_t>(inside)] +
               f * (grid[static_cast<std::size_t>(outside)] - grid[static_cast<std::size_t>(inside)]);
    };
    Eigen::Index r = c;
    while (r + 1 < g && pattern(r + 1) >= level) ++r;
    Eigen::Index l = c;
    while (l > 0 && pattern(l - 1) >= level) --l;
    const double right = r + 1 < g ? crossing(r, r + 1) : grid[static_cast<std::size_t>(r)];
    const double left = l > 0 ? crossing(l, l - 1) : grid[static_cast<std::size_t>(l)];
    return right - left;
}

std::optional<double> first_null(const RVector& pattern, const Grid& grid) {
    const auto g = static_cast<Eigen::Index>(grid.size());
    Eigen::Index i = static_cast<Eigen::Index>(grid.nearest(0.0)) + 1;
    for (; i + 1 < g; ++i) {
        if (pattern(i) <= pattern(i - 1) && pattern(i) < pattern(i + 1)) return grid[static_cast<std::size_t>(i)];
    }
    return std::nullopt;
}

std::vector<NamedPartition> reference_geometries() {
    const std::vector<int> halves{6, 6};
    std::vector<NamedPartition> out;
    out.push_back({"ULA-12", type1_split(make_ula(12), halves)});
    out.push_back({"TypeI-MRA", type1_split(make_mra(12), halves)});
    out.push_back({"TypeII-MRA", type2_build(make_mra(6), 2, 1)});
    out.push_back({"TypeI-NAQ2", type1_split(make_nested(6, 6), halves)});
    out.push_back({"TypeII-NAQ2", type2_build(make_nested(3, 3), 2, 1)});
    return out;
}

NamedPartition reference_geometry(const std::string& name) {
    for (auto& g : reference_geometries()) {
        if (g.name == name) return g;
    }
    throw std::invalid_argument("unknown reference geometry '" + name + "'");
}

const char* to_string(SweepVariable v) noexcept { return v == SweepVariable::Snr ? "snr_db" : "snapshots"; }

void Campaign::validate() const {
    if (geometries.empty()) throw std::invalid_argument("Campaign: at least one geometry is required");
    if (sweep.values.empty()) throw std::invalid_argument("Campaign: sweep values must not be empty");
    if (runs < 1) throw std::invalid_argument("Campaign: runs must be >= 1");
    if (true_dirs.empty()) throw std::invalid_argument("Campaign: at least one source is required");
    if (!(grid_step > 0.0)) throw std::invalid_argument("Campaign: grid_step must be > 0");
    if (snapshots < 1) throw std::invalid_argument("Campaign: snapshots must be >= 1");
    if (sweep.variable == SweepVariable::Snapshots) {
        for (double v : sweep.values) {
            if (v < 1.0 || v != std::floor(v)) {
                throw std::invalid_argument("Campaign: snapshot sweep values must be positive integers");
            }
        }
    }
    estimator.solver.validate();
}

const CampaignRow& CampaignResult::row(const std::string& name, double sweep_value) const {
    for (const auto& r : rows) {
        if (r.name == name && r.sweep_value == sweep_value) return r;
    }
    throw std::out_of_range("CampaignResult: no row for " + name);
}

std::string CampaignResult::to_csv() const {
    std::ostringstream os;
    os << "name,sweep_var,sweep_value,rmse,runs,failures,mean_iters\n";
    os << std::setprecision(12);
    for (const auto& r : rows) {
        os << r.name << ',' << to_string(r.sweep_var) << ',' << r.sweep_value << ',' << r.rmse << ',' << r.runs
           << ',' << r.failures << ',' << r.mean_iters << '\n';
    }
    return os.str();
}

std::string CampaignResult::timing_csv() const {
    std::ostringstream os;
    os << "name,sweep_var,sweep_value,wall_ms,max_iter_solves\n" << std::setprecision(12);
    for (const auto& r : rows) {
        os << r.name << ',' << to_string(r.sweep_var) << ',' << r.sweep_value << ',' << r.wall_ms << ','
           << r.max_iter_solves << '\n';
    }
    return os.str();
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t geometry, std::size_t sweep_index, std::size_t run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(geometry), static_cast<std::uint32_t>(sweep_index),
                      static_cast<std::uint32_t>(run)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

struct TrialOutcome {
    std::vector<double> estimate;
    bool failed = false;
    double mean_iters = 0.0;
    int max_iter_solves = 0;
    double wall_ms = 0.0;
};

} // namespace

CampaignResult run_campaign(const Campaign& campaign) {
    campaign.validate();
    const Grid grid = Grid::uniform(campaign.grid_step);
    std::vector<double> truth = campaign.true_dirs;
    std::sort(truth.begin(), truth.end());

    const std::size_t n_geom = campaign.geometries.size();
    const std::size_t n_sweep = campaign.sweep.values.size();
    const auto n_runs = static_cast<std::size_t>(campaign.runs);
    std::vector<TrialOutcome> outcomes(n_geom * n_sweep * n_runs);

    EstimatorOptions options = campaign.estimator;
    options.workers = 1;

    parallel_for(outcomes.size(), campaign.workers, [&](std::size_t task) {
        const std::size_t run = task % n_runs;
        const std::size_t sweep_index = (task / n_runs) % n_sweep;
        const std::size_t geom = task / (n_runs * n_sweep);
        const double value = campaign.sweep.values[sweep_index];

        Scenario scenario{campaign.geometries[geom].partition, truth, grid, campaign.snr_db, campaign.snapshots,
                          campaign.phase_model, trial_seed(campaign.seed, geom, sweep_index, run)};
        if (campaign.sweep.variable == SweepVariable::Snr) {
            scenario.snr_db = value;
        } else {
            scenario.snapshots = static_cast<int>(value);
        }

        const auto start = std::chrono::steady_clock::now();
        TrialOutcome& out = outcomes[task];
        const SnapshotData data = synthesize(scenario);
        try {
            const EstimateResult res =
                estimate(data, grid, scenario.partition, truth.size(), options);
            out.estimate = res.estimate.estimated_dirs;
            out.mean_iters = res.diagnostics.mean_iterations();
            out.max_iter_solves = res.diagnostics.max_iter_count;
        } catch (const EstimationFailed&) {
            out.failed = true;
        }
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });

    CampaignResult result;
    for (std::size_t geom = 0; geom < n_geom; ++geom) {
        for (std::size_t s = 0; s < n_sweep; ++s) {
            CampaignRow row;
            row.name = campaign.geometries[geom].name;
            row.sweep_var = campaign.sweep.variable;
            row.sweep_value = campaign.sweep.values[s];
            std::vector<std::vector<double>> estimates;
            double iters = 0.0;
            for (std::size_t run = 0; run < n_runs; ++run) {
                const TrialOutcome& out = outcomes[(geom * n_sweep + s) * n_runs + run];
                row.wall_ms += out.wall_ms;
                if (out.failed) {
                    ++row.failures;
                    continue;
                }
                estimates.push_back(out.estimate);
                iters += out.mean_iters;
                row.max_iter_solves += out.max_iter_solves;
            }
            row.runs = static_cast<int>(estimates.size());
            row.rmse = estimates.empty() ? std::numeric_limits<double>::quiet_NaN() : rmse(truth, estimates);
            row.mean_iters = estimates.empty() ? 0.0 : iters / static_cast<double>(estimates.size());
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

Campaign reference_snr_campaign(int runs, std::vector<double> snr_values) {
    Campaign c;
    c.geometries = reference_geometries();
    c.sweep = {SweepVariable::Snr, std::move(snr_values)};
    c.runs = runs;
    c.snapshots = 10;
    return c;
}

Campaign reference_snapshot_campaign(int runs, std::vector<double> snapshot_values) {
    Campaign c;
    c.geometries = reference_geometries();
    c.sweep = {SweepVariable::Snapshots, std::move(snapshot_values)};
    c.runs = runs;
    c.snr_db = 10.0;
    return c;
}

std::string beampattern_csv(const std::vector<NamedPartition>& geometries, const Grid& grid) {
    std::vector<RVector> patterns;
    for (const auto& g : geometries) patterns.push_back(beampattern(g.partition.union_geometry(), grid));
    std::ostringstream os;
    os << "theta";
    for (const auto& g : geometries) os << ',' << g.name;
    os << '\n' << std::setprecision(12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << grid[i];
        for (const auto& p : patterns) os << ',' << p(static_cast<Eigen::Index>(i));
        os << '\n';
    }
    return os.str();
}

} // namespace ncdoa
