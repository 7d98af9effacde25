#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "ncdoa/geometry.hpp"
#include "ncdoa/types.hpp"

namespace ncdoa {

/// Search grid of normalized directions (sine of the DOA), strictly
/// increasing inside [-1, 1).
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<double> points);

    /// Points -1, -1 + step, ... strictly below 1.
    static Grid uniform(double step);

    const std::vector<double>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }

    /// Index of the grid point closest to `direction`.
    std::size_t nearest(double direction) const;

private:
    std::vector<double> points_;
};

/// Steering matrix, entry (k, m) = exp(i pi positions[k] directions[m]) (d = lambda / 2).
CMatrix manifold(std::span<const int> positions, std::span<const double> directions);
CMatrix manifold(const ArrayGeometry& array, const Grid& grid);
CMatrix manifold(const ArrayGeometry& array, std::span<const double> directions);

/// Diagonal of the phase-shift matrix: block l holds conj(exp(i phases[l])).
CVector gamma_diagonal(std::span<const double> phases, const SubarrayPartition& partition);
/// Dense N x N form of the phase-shift matrix.
CMatrix gamma(std::span<const double> phases, const SubarrayPartition& partition);

enum class PhaseModel { PerSnapshot, CalibratedConstant };

const char* to_string(PhaseModel model) noexcept;

struct Scenario {
    SubarrayPartition partition;
    std::vector<double> true_dirs;
    Grid grid;
    /// +infinity disables the noise.
    double snr_db = 10.0;
    int snapshots = 1;
    PhaseModel phase_model = PhaseModel::PerSnapshot;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when the scenario is inconsistent.
    void validate() const;
    /// 10^(-snr/10) relative to unit source power; 0 when noiseless.
    double noise_variance() const noexcept;
};

struct SnapshotData {
    /// N x T, rows stacked by subarray.
    CMatrix observations;
    /// L x T, phi in [0, 2 pi).
    RMatrix phases;
    /// D x T source amplitudes at the true directions.
    CMatrix sources;
    /// N x T noise realisation added to the observations.
    CMatrix noise;
    double noise_var = 0.0;
};

/// Draws sources, noise and phases from `rng` and forms x_t = Gamma(phi_t) A s_t + n_t.
SnapshotData synthesize(const Scenario& scenario, std::mt19937_64& rng);
/// Same, with the generator seeded from scenario.seed.
SnapshotData synthesize(const Scenario& scenario);

/// Replace every per-subarray, per-snapshot phase with fresh draws, keeping the
/// sources and noise. Used to probe noncoherence invariance.
SnapshotData rephase(const SnapshotData& data, const SubarrayPartition& partition,
                     std::span<const double> true_dirs, std::mt19937_64& rng);

/// Writes `<stem>_obs.csv` (t,row,re,im) and `<stem>_phases.csv` (t,subarray,phi).
void write_snapshot_csv(const SnapshotData& data, const std::filesystem::path& stem);
/// Reads an observation matrix written by write_snapshot_csv.
CMatrix read_observations_csv(const std::filesystem::path& path);

} // namespace ncdoa
