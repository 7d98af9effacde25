#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ncdoa/geometry.hpp"
#include "ncdoa/signal.hpp"
#include "ncdoa/solver.hpp"
#include "ncdoa/types.hpp"

namespace ncdoa {

struct LeadingVector {
    CVector vector;
    double singular_value = 0.0;
    /// Set for an all-zero input; `vector` is then zero.
    bool degenerate = false;
};

/// Unit-norm u maximizing ||G^H u||. The entry of largest modulus is rotated
/// to the positive real axis (lowest index wins ties).
LeadingVector leading_left_singular_vector(const CMatrix& g_matrix);

/// Column t of the result is vectors[t]. Equivalent to reshaping
/// blkdiag(u_1, ..., u_T) * 1_T into g x T.
CMatrix fuse_snapshots(std::span<const CVector> vectors);

/// Diagonal of E E^H.
RVector pseudo_spectrum(const CMatrix& e);

enum class PeakSelection { TopD, LocalMaxima };

/// Indices of the `d` largest entries, ascending; ties go to the lower index.
std::vector<std::size_t> hard_threshold_support(const RVector& spectrum, std::size_t d);
/// The `d` largest local maxima of the spectrum, topped up with the largest
/// remaining entries when fewer peaks exist. Ascending indices.
std::vector<std::size_t> local_maxima_support(const RVector& spectrum, std::size_t d);

struct EstimatorOptions {
    double c_const = 2.0;
    /// 0 selects the total sensor count.
    int m_const = 0;
    double epsilon = 1.0;
    SolverConfig solver{};
    PeakSelection peaks = PeakSelection::TopD;
    /// Scale each snapshot's singular vector by its singular value.
    bool weight_by_singular_value = false;
    /// Worker threads for the per-snapshot solves; 0 uses default_worker_count().
    unsigned workers = 1;
};

struct SpectrumEstimate {
    RVector pseudo_spectrum;
    std::vector<std::size_t> support;
    std::vector<double> estimated_dirs;
};

struct EstimateDiagnostics {
    std::vector<SolveStatus> statuses;
    std::vector<int> iterations;
    int max_iter_count = 0;
    int infeasible_count = 0;
    int degenerate_count = 0;
    double mean_iterations() const;
};

struct EstimateResult {
    SpectrumEstimate estimate;
    EstimateDiagnostics diagnostics;
};

/// Per-subarray manifolds of the partition over the grid, in stacking order.
std::vector<CMatrix> subarray_manifolds(const SubarrayPartition& partition, const Grid& grid);

/// Multi-snapshot noncoherent low-rank and sparse recovery: one convex solve
/// per snapshot, leading singular vectors fused column-wise, pseudo-spectrum
/// thresholded to the d_sources largest entries.
/// Throws EstimationFailed when the pseudo-spectrum is identically zero.
EstimateResult estimate(const CMatrix& observations, double noise_var, const Grid& grid,
                        const SubarrayPartition& partition, std::size_t d_sources,
                        const EstimatorOptions& options = {});

inline EstimateResult estimate(const SnapshotData& data, const Grid& grid, const SubarrayPartition& partition,
                               std::size_t d_sources, const EstimatorOptions& options = {}) {
    return estimate(data.observations, data.noise_var, grid, partition, d_sources, options);
}

} // namespace ncdoa
