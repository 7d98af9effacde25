#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>

#include "ncdoa/signal.hpp"
#include "oracles.hpp"

using namespace ncdoa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Scenario reference_scenario(double snr_db, int snapshots, std::uint64_t seed) {
    return Scenario{type2_build(make_mra(5), 2, 1), {0.0, 0.4}, Grid::uniform(0.1), snr_db, snapshots,
                    PhaseModel::PerSnapshot, seed};
}

} // namespace

TEST_CASE("grid construction", "[signal]") {
    const Grid g = Grid::uniform(0.01);
    CHECK(g.size() == 200);
    CHECK(g[0] == -1.0);
    CHECK(g[100] == 0.0);
    CHECK(g[120] == 0.2);
    CHECK(g.points().back() < 1.0);
    CHECK(Grid::uniform(0.5).points() == std::vector<double>{-1.0, -0.5, 0.0, 0.5});
    CHECK(g.nearest(0.2049) == 120);
    CHECK(g.nearest(-5.0) == 0);
    CHECK_THROWS_AS(Grid({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({0.5, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid::uniform(0.0), std::invalid_argument);
}

TEST_CASE("steering matrix entries", "[signal]") {
    const std::vector<double> dirs{0.0, 0.25, -0.5};
    const CMatrix a = manifold(make_mra(4), dirs);
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 3);
    CHECK(a.col(0).isApprox(CVector::Ones(4)));
    const std::vector<int> pos = make_mra(4).positions();
    for (Eigen::Index k = 0; k < 4; ++k) {
        for (Eigen::Index m = 0; m < 3; ++m) {
            const cplx ref = std::polar(1.0, kPi * pos[static_cast<std::size_t>(k)] * dirs[static_cast<std::size_t>(m)]);
            CHECK(std::abs(a(k, m) - ref) < 1e-14);
        }
    }
    CHECK(a.cwiseAbs().isApprox(Eigen::MatrixXd::Ones(4, 3)));
}

TEST_CASE("translated subarray manifold is a per-direction phase ramp", "[signal]") {
    const Grid grid = Grid::uniform(0.01);
    const auto p = type2_build(make_nested(3, 3), 3, 2);
    const CMatrix a0 = manifold(p.subarray(0), grid);
    for (std::size_t l = 1; l < p.count(); ++l) {
        const int shift = p.subarray(l).front();
        const CMatrix al = manifold(p.subarray(l), grid);
        for (std::size_t m = 0; m < grid.size(); ++m) {
            const cplx ramp = std::polar(1.0, kPi * shift * grid[m]);
            const auto c = static_cast<Eigen::Index>(m);
            CHECK((al.col(c) - ramp * a0.col(c)).norm() < 1e-12);
        }
    }
}

TEST_CASE("phase matrix is diagonal and unitary", "[signal]") {
    const auto p = type2_build(make_mra(4), 3, 1);
    const std::vector<double> phases{0.3, 2.0, 5.5};
    const CMatrix g = gamma(phases, p);
    const auto n = static_cast<Eigen::Index>(p.total_sensors());
    CHECK((g * g.adjoint() - CMatrix::Identity(n, n)).norm() < 1e-14);
    CHECK((g - CMatrix(g.diagonal().asDiagonal())).norm() == 0.0);
    for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto r = static_cast<Eigen::Index>(p.offset(l) + k);
            CHECK(std::abs(g(r, r) - std::conj(std::polar(1.0, phases[l]))) < 1e-15);
        }
    }
    const std::vector<double> zero(3, 0.0);
    CHECK(gamma(zero, p).isApprox(CMatrix::Identity(n, n)));
    const std::vector<double> short_phases{0.1};
    CHECK_THROWS_AS(gamma_diagonal(short_phases, p), std::invalid_argument);
}

TEST_CASE("scenario validation", "[signal]") {
    Scenario s = reference_scenario(10.0, 1, 0);
    CHECK_NOTHROW(s.validate());
    s.snapshots = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = reference_scenario(10.0, 1, 0);
    s.true_dirs = {};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = reference_scenario(10.0, 1, 0);
    s.true_dirs = {1.2};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK_THAT(reference_scenario(10.0, 1, 0).noise_variance(), WithinAbs(0.1, 1e-15));
    CHECK(reference_scenario(std::numeric_limits<double>::infinity(), 1, 0).noise_variance() == 0.0);
}

TEST_CASE("synthesized snapshots follow the forward model", "[signal]") {
    const Scenario sc = reference_scenario(10.0, 4, 42);
    const SnapshotData d = synthesize(sc);
    REQUIRE(d.observations.rows() == 10);
    REQUIRE(d.observations.cols() == 4);
    REQUIRE(d.phases.rows() == 2);
    REQUIRE(d.sources.rows() == 2);
    const CMatrix a = manifold(sc.partition.union_geometry(), sc.true_dirs);
    for (Eigen::Index t = 0; t < 4; ++t) {
        std::vector<double> phi{d.phases(0, t), d.phases(1, t)};
        CHECK(phi[0] >= 0.0);
        CHECK(phi[1] < 2.0 * kPi);
        const CVector rebuilt = gamma(phi, sc.partition) * a * d.sources.col(t) + d.noise.col(t);
        CHECK((rebuilt - d.observations.col(t)).norm() < 1e-12);
    }
    // Same seed, same data.
    CHECK(synthesize(sc).observations == d.observations);
}

TEST_CASE("noiseless subarray magnitudes do not depend on the phases", "[signal]") {
    const Scenario sc = reference_scenario(std::numeric_limits<double>::infinity(), 3, 9);
    const SnapshotData d = synthesize(sc);
    CHECK(d.noise.norm() == 0.0);
    std::mt19937_64 rng(77);
    const SnapshotData e = rephase(d, sc.partition, sc.true_dirs, rng);
    CHECK(e.sources == d.sources);
    CHECK((e.phases - d.phases).norm() > 0.0);
    CHECK((e.observations.cwiseAbs() - d.observations.cwiseAbs()).norm() < 1e-12);
    // Within a subarray the relative phases are untouched.
    for (std::size_t l = 0; l < sc.partition.count(); ++l) {
        const auto off = static_cast<Eigen::Index>(sc.partition.offset(l));
        for (Eigen::Index t = 0; t < 3; ++t) {
            const cplx r0 = d.observations(off, t) * std::conj(d.observations(off + 1, t));
            const cplx r1 = e.observations(off, t) * std::conj(e.observations(off + 1, t));
            CHECK(std::abs(r0 - r1) < 1e-12);
        }
    }
}

TEST_CASE("calibrated phase model holds phases across snapshots", "[signal]") {
    Scenario sc = reference_scenario(10.0, 5, 3);
    sc.phase_model = PhaseModel::CalibratedConstant;
    const SnapshotData d = synthesize(sc);
    for (Eigen::Index t = 1; t < 5; ++t) CHECK(d.phases.col(t) == d.phases.col(0));
}

TEST_CASE("empirical snr matches the requested value", "[signal]") {
    Scenario sc = reference_scenario(10.0, 4000, 5);
    const SnapshotData d = synthesize(sc);
    const double signal = (d.observations - d.noise).squaredNorm();
    const double noise = d.noise.squaredNorm();
    // Per-sensor signal power is D (unit-power sources), so compare per source.
    const double snr = signal / noise / static_cast<double>(sc.true_dirs.size());
    CHECK_THAT(snr, WithinRel(10.0, 0.05));
    const double src_power = d.sources.squaredNorm() / static_cast<double>(d.sources.size());
    CHECK_THAT(src_power, WithinRel(1.0, 0.05));
}

TEST_CASE("observation csv round trip", "[signal]") {
    const SnapshotData d = synthesize(reference_scenario(0.0, 3, 1));
    const auto dir = std::filesystem::temp_directory_path() / "ncdoa_signal_test";
    std::filesystem::create_directories(dir);
    write_snapshot_csv(d, dir / "snap");
    CHECK(std::filesystem::exists(dir / "snap_phases.csv"));
    const CMatrix back = read_observations_csv(dir / "snap_obs.csv");
    CHECK((back - d.observations).norm() < 1e-12 * (1.0 + d.observations.norm()));
    CHECK_THROWS(read_observations_csv(dir / "missing.csv"));
}
