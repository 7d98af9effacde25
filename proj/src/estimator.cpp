#include "ncdoa/estimator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ncdoa/errors.hpp"
#include "ncdoa/parallel.hpp"

namespace ncdoa {

LeadingVector leading_left_singular_vector(const CMatrix& g_matrix) {
    LeadingVector out;
    if (g_matrix.size() == 0 || g_matrix.cwiseAbs().maxCoeff() == 0.0) {
        out.vector = CVector::Zero(g_matrix.rows());
        out.degenerate = true;
        return out;
    }
    Eigen::JacobiSVD<CMatrix> svd(g_matrix, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw NumericalError("leading_left_singular_vector: SVD failed");
    out.singular_value = svd.singularValues()(0);
    out.vector = svd.matrixU().col(0);

    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.vector.size(); ++i) {
        const double mag = std::abs(out.vector(i));
        if (mag > best) {
            best = mag;
            pivot = i;
        }
    }
    out.vector *= std::conj(out.vector(pivot)) / best;
    out.vector(pivot) = cplx(best, 0.0);
    return out;
}

CMatrix fuse_snapshots(std::span<const CVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("fuse_snapshots: no vectors");
    const Eigen::Index g = vectors.front().size();
    CMatrix e(g, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t t = 0; t < vectors.size(); ++t) {
        if (vectors[t].size() != g) throw std::invalid_argument("fuse_snapshots: vectors must share one length");
        e.col(static_cast<Eigen::Index>(t)) = vectors[t];
    }
    return e;
}

RVector pseudo_spectrum(const CMatrix& e) { return e.rowwise().squaredNorm(); }

std::vector<std::size_t> hard_threshold_support(const RVector& spectrum, std::size_t d) {
    const auto g = static_cast<std::size_t>(spectrum.size());
    if (d > g) throw std::invalid_argument("hard_threshold_support: d exceeds the spectrum length");
    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return spectrum(static_cast<Eigen::Index>(a)) > spectrum(static_cast<Eigen::Index>(b));
    });
    order.resize(d);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> local_maxima_support(const RVector& spectrum, std::size_t d) {
    const auto g = static_cast<std::size_t>(spectrum.size());
    if (d > g) throw std::invalid_argument("local_maxima_support: d exceeds the spectrum length");
    auto at = [&](std::size_t i) { return spectrum(static_cast<Eigen::Index>(i)); };
    std::vector<std::size_t> peaks, rest;
    for (std::size_t i = 0; i < g; ++i) {
        const bool left_ok = i == 0 || at(i) > at(i - 1);
        const bool right_ok = i + 1 == g || at(i) >= at(i + 1);
        (left_ok && right_ok && at(i) > 0.0 ? peaks : rest).push_back(i);
    }
    auto by_value = [&](std::size_t a, std::size_t b) { return at(a) > at(b); };
    std::stable_sort(peaks.begin(), peaks.end(), by_value);
    std::vector<std::size_t> chosen(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(std::min(d, peaks.size())));
    if (chosen.size() < d) {
        std::stable_sort(rest.begin(), rest.end(), by_value);
        for (std::size_t i = 0; chosen.size() < d; ++i) chosen.push_back(rest[i]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double EstimateDiagnostics::mean_iterations() const {
    if (iterations.empty()) return 0.0;
    return std::accumulate(iterations.begin(), iterations.end(), 0.0) / static_cast<double>(iterations.size());
}

std::vector<CMatrix> subarray_manifolds(const SubarrayPartition& partition, const Grid& grid) {
    std::vector<CMatrix> out;
    out.reserve(partition.count());
    for (const auto& s : partition.subarrays()) out.push_back(manifold(s, grid));
    return out;
}

EstimateResult estimate(const CMatrix& observations, double noise_var, const Grid& grid,
                        const SubarrayPartition& partition, std::size_t d_sources,
                        const EstimatorOptions& options) {
    if (d_sources == 0 || d_sources > grid.size()) {
        throw std::invalid_argument("estimate: d_sources must be in [1, grid size]");
    }
    if (observations.cols() < 1) throw std::invalid_argument("estimate: at least one snapshot is required");
    if (observations.rows() != static_cast<Eigen::Index>(partition.total_sensors())) {
        throw std::invalid_argument("estimate: observation rows must match the partition sensor count");
    }

    const auto t_count = static_cast<std::size_t>(observations.cols());
    const std::vector<CMatrix> manifolds = subarray_manifolds(partition, grid);

    std::vector<CVector> vectors(t_count);
    EstimateDiagnostics diag;
    diag.statuses.resize(t_count);
    diag.iterations.resize(t_count);
    std::vector<char> degenerate(t_count, 0);

    parallel_for(t_count, options.workers, [&](std::size_t t) {
        RecoveryProblem problem{manifolds, observations.col(static_cast<Eigen::Index>(t)), noise_var,
                                options.c_const, options.m_const, options.epsilon};
        const RecoverySolution sol = solve_smv(problem, options.solver);
        LeadingVector lead = leading_left_singular_vector(sol.g_matrix);
        if (options.weight_by_singular_value) lead.vector *= lead.singular_value;
        vectors[t] = std::move(lead.vector);
        degenerate[t] = lead.degenerate ? 1 : 0;
        diag.statuses[t] = sol.status;
        diag.iterations[t] = sol.iterations;
    });

    for (std::size_t t = 0; t < t_count; ++t) {
        if (diag.statuses[t] == SolveStatus::MaxIter) ++diag.max_iter_count;
        if (diag.statuses[t] == SolveStatus::Infeasible) ++diag.infeasible_count;
        diag.degenerate_count += degenerate[t];
    }

    const CMatrix e = fuse_snapshots(vectors);
    EstimateResult result;
    result.estimate.pseudo_spectrum = pseudo_spectrum(e);
    if (!(result.estimate.pseudo_spectrum.maxCoeff() > 0.0)) {
        throw EstimationFailed("estimate: pseudo-spectrum is identically zero");
    }
    result.estimate.support = options.peaks == PeakSelection::TopD
                                  ? hard_threshold_support(result.estimate.pseudo_spectrum, d_sources)
                                  : local_maxima_support(result.estimate.pseudo_spectrum, d_sources);
    for (std::size_t idx : result.estimate.support) result.estimate.estimated_dirs.push_back(grid[idx]);
    result.diagnostics = std::move(diag);
    return result;
}

} // namespace ncdoa
