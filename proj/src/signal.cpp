#include "ncdoa/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ncdoa {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("Grid: at least one point is required");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i] >= -1.0 && points_[i] < 1.0)) {
            throw std::invalid_argument("Grid: points must lie in [-1, 1)");
        }
        if (i > 0 && points_[i] <= points_[i - 1]) {
            throw std::invalid_argument("Grid: points must be strictly increasing");
        }
    }
}

Grid Grid::uniform(double step) {
    if (!(step > 0.0) || step > 2.0) throw std::invalid_argument("Grid::uniform: step must be in (0, 2]");
    std::vector<double> pts;
    // Points are -1 + k * step, rounded so on-grid sources compare exactly.
    const double scale = 1e12;
    for (long k = 0;; ++k) {
        double p = -1.0 + static_cast<double>(k) * step;
        p = std::round(p * scale) / scale;
        if (p >= 1.0 - 1e-12) break;
        pts.push_back(p);
    }
    return Grid(std::move(pts));
}

std::size_t Grid::nearest(double direction) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), direction);
    if (it == points_.begin()) return 0;
    if (it == points_.end()) return points_.size() - 1;
    const auto hi = static_cast<std::size_t>(it - points_.begin());
    return (points_[hi] - direction) < (direction - points_[hi - 1]) ? hi : hi - 1;
}

CMatrix manifold(std::span<const int> positions, std::span<const double> directions) {
    CMatrix a(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(directions.size()));
    for (std::size_t m = 0; m < directions.size(); ++m) {
        for (std::size_t k = 0; k < positions.size(); ++k) {
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
                std::polar(1.0, kPi * positions[k] * directions[m]);
        }
    }
    return a;
}

CMatrix manifold(const ArrayGeometry& array, const Grid& grid) {
    return manifold(std::span<const int>(array.positions()), std::span<const double>(grid.points()));
}

CMatrix manifold(const ArrayGeometry& array, std::span<const double> directions) {
    return manifold(std::span<const int>(array.positions()), directions);
}

CVector gamma_diagonal(std::span<const double> phases, const SubarrayPartition& partition) {
    if (phases.size() != partition.count()) {
        throw std::invalid_argument("gamma: need one phase per subarray");
    }
    CVector diag(static_cast<Eigen::Index>(partition.total_sensors()));
    Eigen::Index row = 0;
    for (std::size_t l = 0; l < partition.count(); ++l) {
        const cplx alpha_conj = std::conj(std::polar(1.0, phases[l]));
        for (std::size_t k = 0; k < partition.subarray(l).size(); ++k) diag(row++) = alpha_conj;
    }
    return diag;
}

CMatrix gamma(std::span<const double> phases, const SubarrayPartition& partition) {
    return gamma_diagonal(phases, partition).asDiagonal();
}

const char* to_string(PhaseModel model) noexcept {
    return model == PhaseModel::PerSnapshot ? "per_snapshot" : "calibrated";
}

void Scenario::validate() const {
    if (true_dirs.empty()) throw std::invalid_argument("Scenario: at least one source is required");
    std::set<double> distinct;
    for (double d : true_dirs) {
        if (!(d >= -1.0 && d < 1.0)) throw std::invalid_argument("Scenario: directions must lie in [-1, 1)");
        distinct.insert(d);
    }
    if (distinct.size() != true_dirs.size()) throw std::invalid_argument("Scenario: directions must be distinct");
    if (grid.size() == 0) throw std::invalid_argument("Scenario: grid is empty");
    if (true_dirs.size() >= grid.size()) {
        throw std::invalid_argument("Scenario: number of sources must be below the grid size");
    }
    if (snapshots < 1) throw std::invalid_argument("Scenario: snapshots must be >= 1");
    if (std::isnan(snr_db)) throw std::invalid_argument("Scenario: snr_db is NaN");
}

double Scenario::noise_variance() const noexcept {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

namespace {

// Circular complex Gaussian with E|z|^2 = variance.
cplx complex_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

RMatrix draw_phases(std::mt19937_64& rng, std::size_t l_count, int snapshots, PhaseModel model) {
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
    RMatrix phases(static_cast<Eigen::Index>(l_count), snapshots);
    for (int t = 0; t < snapshots; ++t) {
        for (std::size_t l = 0; l < l_count; ++l) {
            const auto li = static_cast<Eigen::Index>(l);
            phases(li, t) = (model == PhaseModel::CalibratedConstant && t > 0) ? phases(li, 0) : uniform(rng);
        }
    }
    return phases;
}

CMatrix form_observations(const CMatrix& steering, const RMatrix& phases, const CMatrix& sources,
                          const CMatrix& noise, const SubarrayPartition& partition) {
    CMatrix x = steering * sources;
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        std::vector<double> phi(static_cast<std::size_t>(phases.rows()));
        for (Eigen::Index l = 0; l < phases.rows(); ++l) phi[static_cast<std::size_t>(l)] = phases(l, t);
        x.col(t) = gamma_diagonal(phi, partition).cwiseProduct(x.col(t));
    }
    return x + noise;
}

} // namespace

SnapshotData synthesize(const Scenario& scenario, std::mt19937_64& rng) {
    scenario.validate();
    const auto& partition = scenario.partition;
    const auto n = static_cast<Eigen::Index>(partition.total_sensors());
    const auto d = static_cast<Eigen::Index>(scenario.true_dirs.size());
    const int t_count = scenario.snapshots;

    SnapshotData data;
    data.noise_var = scenario.noise_variance();
    data.phases = draw_phases(rng, partition.count(), t_count, scenario.phase_model);

    data.sources.resize(d, t_count);
    for (int t = 0; t < t_count; ++t) {
        for (Eigen::Index k = 0; k < d; ++k) data.sources(k, t) = complex_normal(rng, 1.0);
    }
    data.noise = CMatrix::Zero(n, t_count);
    if (data.noise_var > 0.0) {
        for (int t = 0; t < t_count; ++t) {
            for (Eigen::Index k = 0; k < n; ++k) data.noise(k, t) = complex_normal(rng, data.noise_var);
        }
    }

    const std::vector<int> rows = partition.stacked_positions();
    const CMatrix steering = manifold(std::span<const int>(rows), std::span<const double>(scenario.true_dirs));
    data.observations = form_observations(steering, data.phases, data.sources, data.noise, partition);
    return data;
}

SnapshotData synthesize(const Scenario& scenario) {
    std::mt19937_64 rng(scenario.seed);
    return synthesize(scenario, rng);
}

SnapshotData rephase(const SnapshotData& data, const SubarrayPartition& partition,
                     std::span<const double> true_dirs, std::mt19937_64& rng) {
    SnapshotData out = data;
    out.phases = draw_phases(rng, partition.count(), static_cast<int>(data.observations.cols()),
                             PhaseModel::PerSnapshot);
    const std::vector<int> rows = partition.stacked_positions();
    const CMatrix steering = manifold(std::span<const int>(rows), true_dirs);
    out.observations = form_observations(steering, out.phases, out.sources, out.noise, partition);
    return out;
}

void write_snapshot_csv(const SnapshotData& data, const std::filesystem::path& stem) {
    std::ofstream obs(stem.string() + "_obs.csv");
    std::ofstream ph(stem.string() + "_phases.csv");
    if (!obs || !ph) throw std::runtime_error("write_snapshot_csv: cannot open output for " + stem.string());
    obs << "t,row,re,im\n" << std::setprecision(17);
    for (Eigen::Index t = 0; t < data.observations.cols(); ++t) {
        for (Eigen::Index k = 0; k < data.observations.rows(); ++k) {
            const cplx v = data.observations(k, t);
            obs << t << ',' << k << ',' << v.real() << ',' << v.imag() << '\n';
        }
    }
    ph << "t,subarray,phi\n" << std::setprecision(17);
    for (Eigen::Index t = 0; t < data.phases.cols(); ++t) {
        for (Eigen::Index l = 0; l < data.phases.rows(); ++l) {
            ph << t << ',' << l << ',' << data.phases(l, t) << '\n';
        }
    }
}

CMatrix read_observations_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("read_observations_csv: cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "t,row,re,im") throw std::invalid_argument("read_observations_csv: bad header in " + path.string());
    struct Entry {
        long t, row;
        double re, im;
    };
    std::vector<Entry> entries;
    long max_t = -1, max_row = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Entry e{};
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ls >> e.t >> c1 >> e.row >> c2 >> e.re >> c3 >> e.im) || c1 != ',' || c2 != ',' || c3 != ',' ||
            e.t < 0 || e.row < 0) {
            throw std::invalid_argument("read_observations_csv: malformed line '" + line + "'");
        }
        max_t = std::max(max_t, e.t);
        max_row = std::max(max_row, e.row);
        entries.push_back(e);
    }
    if (entries.empty()) throw std::invalid_argument("read_observations_csv: no data");
    if (entries.size() != static_cast<std::size_t>((max_t + 1) * (max_row + 1))) {
        throw std::invalid_argument("read_observations_csv: incomplete matrix");
    }
    CMatrix x(max_row + 1, max_t + 1);
    for (const auto& e : entries) x(e.row, e.t) = cplx(e.re, e.im);
    return x;
}

} // namespace ncdoa
