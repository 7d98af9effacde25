#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncdoa/estimator.hpp"
#include "ncdoa/geometry.hpp"
#include "ncdoa/signal.hpp"

namespace ncdoa {

/// sqrt( sum_i ||truth - estimates[i]||^2 / (D R) ), pairing entries in order.
double rmse(std::span<const double> truth, const std::vector<std::vector<double>>& estimates);

/// Uniformly weighted beampattern |sum_k exp(i pi s_k theta)|^2 / N^2.
RVector beampattern(const ArrayGeometry& array, const Grid& grid);

/// Width of the region around the grid point nearest 0 where the pattern
/// stays at or above half power, linearly interpolated at both edges.
double half_power_width(const RVector& pattern, const Grid& grid);
/// First local minimum of the pattern strictly right of 0, or nullopt.
std::optional<double> first_null(const RVector& pattern, const Grid& grid);

struct NamedPartition {
    std::string name;
    SubarrayPartition partition;
};

/// Geometries of the reference experiment: two subarrays of six sensors.
/// ULA-12 split in halves, Type-I MRA/NAQ2 from the 12-sensor array split in
/// halves, Type-II MRA/NAQ2 from two 6-sensor copies with mu = 1.
std::vector<NamedPartition> reference_geometries();
/// Looks up one of reference_geometries() by name.
NamedPartition reference_geometry(const std::string& name);

enum class SweepVariable { Snr, Snapshots };

const char* to_string(SweepVariable v) noexcept;

struct Sweep {
    SweepVariable variable = SweepVariable::Snr;
    std::vector<double> values;
};

struct Campaign {
    std::vector<NamedPartition> geometries;
    Sweep sweep;
    int runs = 50;
    std::vector<double> true_dirs{0.0, 0.2, 0.4, 0.6, 0.8};
    double grid_step = 0.01;
    /// Held fixed unless swept.
    double snr_db = 10.0;
    int snapshots = 10;
    PhaseModel phase_model = PhaseModel::PerSnapshot;
    /// Peaks of the fused spectrum rather than its D largest bins.
    EstimatorOptions estimator{.peaks = PeakSelection::LocalMaxima};
    std::uint64_t seed = 1;
    /// 0 uses default_worker_count().
    unsigned workers = 0;

    void validate() const;
};

struct CampaignRow {
    std::string name;
    SweepVariable sweep_var = SweepVariable::Snr;
    double sweep_value = 0.0;
    double rmse = 0.0;
    int runs = 0;
    /// Runs excluded because estimation failed.
    int failures = 0;
    double mean_iters = 0.0;
    int max_iter_solves = 0;
    double wall_ms = 0.0;
};

struct CampaignResult {
    std::vector<CampaignRow> rows;

    const CampaignRow& row(const std::string& name, double sweep_value) const;
    /// name,sweep_var,sweep_value,rmse,runs,failures,mean_iters. Byte-identical
    /// for identical campaigns.
    std::string to_csv() const;
    /// name,sweep_var,sweep_value,wall_ms,max_iter_solves.
    std::string timing_csv() const;
};

/// Seed of the independent stream for one trial.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t geometry, std::size_t sweep_index, std::size_t run);

CampaignResult run_campaign(const Campaign& campaign);

Campaign reference_snr_campaign(int runs = 50, std::vector<double> snr_values = {0.0, 10.0, 20.0});
Campaign reference_snapshot_campaign(int runs = 50, std::vector<double> snapshot_values = {2, 4, 6, 8, 10});

/// grid,<name>... one column per geometry.
std::string beampattern_csv(const std::vector<NamedPartition>& geometries, const Grid& grid);

} // namespace ncdoa
