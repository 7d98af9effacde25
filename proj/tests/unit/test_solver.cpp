#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ncdoa/signal.hpp"
#include "ncdoa/solver.hpp"
#include "oracles.hpp"

using namespace ncdoa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RecoveryProblem toy_problem(std::uint64_t seed, double noise_var, int active_rows = 2) {
    std::mt19937_64 rng(seed);
    const auto part = type2_build(make_mra(4), 2, 1);
    const Grid grid = Grid::uniform(0.125);
    RecoveryProblem p;
    for (const auto& s : part.subarrays()) p.subarray_manifolds.push_back(manifold(s, grid));
    CMatrix g = CMatrix::Zero(16, 2);
    std::uniform_int_distribution<int> pick(0, 15);
    for (int k = 0; k < active_rows; ++k) g.row(pick(rng)) = oracle::random_complex(1, 2, rng);
    p.observation = apply_stacked(p, g) + oracle::random_complex(8, 1, rng, std::sqrt(noise_var));
    p.noise_var = noise_var;
    return p;
}

} // namespace

TEST_CASE("row prox: fixed examples", "[solver]") {
    CMatrix m(3, 2);
    m << cplx(3, 0), cplx(4, 0), cplx(0.3, 0.1), cplx(-0.2, 0), cplx(0, 0), cplx(0, 0);
    const CMatrix z = prox_row_l12(m, 1.0);
    CHECK_THAT(z(0, 0).real(), WithinAbs(2.4, 1e-14));
    CHECK_THAT(z(0, 1).real(), WithinAbs(3.2, 1e-14));
    CHECK(z.row(1).norm() == 0.0);
    CHECK(z.row(2).norm() == 0.0);
    CHECK(prox_row_l12(m, 0.0) == m);
    CHECK_THROWS_AS(prox_row_l12(m, -1.0), std::invalid_argument);

    const auto [a, b] = oracle::grid_min_l2_prox(3.0, 4.0, 1.0);
    CHECK_THAT(a, WithinAbs(2.4, 1e-6));
    CHECK_THAT(b, WithinAbs(3.2, 1e-6));
}

TEST_CASE("nuclear prox: fixed examples", "[solver]") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    const CMatrix z = prox_nuclear(d, 1.0);
    CHECK(std::abs(z(0, 0) - cplx(2.0, 0.0)) < 1e-12);
    CHECK(z.block(0, 1, 2, 1).norm() < 1e-12);
    CHECK(std::abs(z(1, 0)) < 1e-12);
    CHECK(prox_nuclear(d, 0.0).isApprox(d));
    CHECK_THROWS_AS(prox_nuclear(d, -0.5), std::invalid_argument);

    std::mt19937_64 rng(1);
    const CMatrix u = oracle::random_complex(20, 1, rng), v = oracle::random_complex(3, 1, rng);
    const CMatrix r1 = u * v.adjoint();
    const double s1 = r1.norm();
    const CMatrix out = prox_nuclear(r1, 0.25 * s1);
    Eigen::JacobiSVD<CMatrix> svd(out);
    CHECK_THAT(svd.singularValues()(0), WithinRel(0.75 * s1, 1e-10));
    CHECK(svd.singularValues()(1) < 1e-10 * s1);
}

TEST_CASE("prox outputs beat random perturbations", "[solver]") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> rows(1, 30), cols(1, 4);
    std::uniform_real_distribution<double> taus(0.0, 2.0);
    std::normal_distribution<double> scale(0.0, 1.0);
    for (int inst = 0; inst < 40; ++inst) {
        const Eigen::Index r = rows(rng), c = cols(rng);
        const CMatrix m = oracle::random_complex(r, c, rng);
        const double tau = taus(rng);
        const CMatrix z1 = prox_row_l12(m, tau), z2 = prox_nuclear(m, tau);
        const double f1 = oracle::prox_objective_l12(z1, m, tau);
        const double f2 = oracle::prox_objective_nuclear(z2, m, tau);
        for (int k = 0; k < 20; ++k) {
            const double s = std::pow(10.0, -3.0 + 3.0 * std::abs(scale(rng)));
            CHECK(oracle::prox_objective_l12(z1 + oracle::random_complex(r, c, rng, s), m, tau) >= f1);
            CHECK(oracle::prox_objective_nuclear(z2 + oracle::random_complex(r, c, rng, s), m, tau) >= f2);
        }
    }
}

TEST_CASE("nuclear prox agrees across shapes", "[solver]") {
    // Tall thin inputs take a Gram-matrix path; compare with a direct SVD.
    std::mt19937_64 rng(8);
    for (auto [r, c] : {std::pair{40, 2}, std::pair{200, 3}, std::pair{5, 5}, std::pair{3, 7}}) {
        const CMatrix m = oracle::random_complex(r, c, rng);
        Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd s = (svd.singularValues().array() - 0.7).max(0.0);
        const CMatrix ref = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
        CHECK((prox_nuclear(m, 0.7) - ref).norm() < 1e-10 * (1.0 + ref.norm()));
    }
}

TEST_CASE("residual ball projection", "[solver]") {
    CVector r(2);
    r << cplx(0.5, 0.0), cplx(0.0, 0.0);
    CHECK(project_residual_ball(r, 1.0) == r);
    r << cplx(0.0, 2.0), cplx(0.0, 0.0);
    CHECK(project_residual_ball(r, 1.0).isApprox(r * 0.5));
    CHECK(project_residual_ball(r, 0.0).norm() == 0.0);
    CHECK_THROWS_AS(project_residual_ball(r, -1.0), std::invalid_argument);
}

TEST_CASE("stacked operator and its adjoint", "[solver]") {
    const RecoveryProblem p = toy_problem(3, 0.1);
    std::mt19937_64 rng(4);
    const CMatrix g = oracle::random_complex(16, 2, rng);
    const CVector r = oracle::random_complex(8, 1, rng);
    const CMatrix b = oracle::stacked_operator(p.subarray_manifolds);
    CVector vg(32);
    vg << g.col(0), g.col(1);
    CHECK((apply_stacked(p, g) - b * vg).norm() < 1e-12);
    const cplx lhs = apply_stacked(p, g).dot(r);
    const cplx rhs = vg.dot(b.adjoint() * r);
    CHECK(std::abs(lhs - rhs) < 1e-11);
    CMatrix adj = adjoint_stacked(p, r);
    CVector va(32);
    va << adj.col(0), adj.col(1);
    CHECK((va - b.adjoint() * r).norm() < 1e-12);
    CHECK_THAT(residual_energy(p, g), WithinRel((p.observation - b * vg).squaredNorm(), 1e-12));
}

TEST_CASE("problem and config validation", "[solver]") {
    RecoveryProblem p = toy_problem(1, 0.1);
    CHECK(p.radius() == Catch::Approx(std::sqrt(2.0 * 8 * 0.1)));
    p.m_const = 3;
    CHECK(p.radius() == Catch::Approx(std::sqrt(2.0 * 3 * 0.1)));
    p.noise_var = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = toy_problem(1, 0.1);
    p.observation = CVector::Zero(5);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    SolverConfig c;
    c.over_relaxation = 2.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.rho = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero observation yields the zero solution", "[solver]") {
    RecoveryProblem p = toy_problem(2, 0.1);
    p.observation.setZero();
    const auto sol = solve_smv(p);
    CHECK(sol.status == SolveStatus::Converged);
    CHECK(sol.g_matrix.norm() == 0.0);
    CHECK(sol.objective == 0.0);
    CHECK(sol.feasibility_gap <= 0.0);
}

TEST_CASE("noiseless single source is recovered with a rank-one solution", "[solver]") {
    const auto part = type2_build(make_mra(5), 2, 1);
    const Grid grid = Grid::uniform(0.1);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        Scenario sc{part, {0.2}, grid, std::numeric_limits<double>::infinity(), 1, PhaseModel::PerSnapshot,
                    static_cast<std::uint64_t>(trial)};
        const SnapshotData d = synthesize(sc);
        RecoveryProblem p;
        for (const auto& s : part.subarrays()) p.subarray_manifolds.push_back(manifold(s, grid));
        p.observation = d.observations.col(0);
        p.noise_var = 0.0;
        const auto sol = solve_smv(p);
        CHECK(sol.status == SolveStatus::Converged);
        const Eigen::Index target = static_cast<Eigen::Index>(grid.nearest(0.2));
        const double peak = sol.g_matrix.row(target).norm();
        for (Eigen::Index i = 0; i < sol.g_matrix.rows(); ++i) {
            if (i != target) CHECK(sol.g_matrix.row(i).norm() < 1e-4 * peak);
        }
        Eigen::JacobiSVD<CMatrix> svd(sol.g_matrix);
        const auto& s = svd.singularValues();
        CHECK(s(0) * s(0) >= 0.99 * s.squaredNorm());
        CHECK(s(1) < 1e-6 * s(0) + 1e-6);
    }
}

TEST_CASE("infeasible noiseless data is reported", "[solver]") {
    RecoveryProblem p = toy_problem(5, 0.0);
    // Four directions on a two-point grid cannot explain eight generic samples.
    p.subarray_manifolds = {manifold(ArrayGeometry({0, 1, 4, 6}), std::vector<double>{0.0, 0.5}),
                            manifold(ArrayGeometry({7, 8, 11, 13}), std::vector<double>{0.0, 0.5})};
    std::mt19937_64 rng(6);
    p.observation = oracle::random_complex(8, 1, rng);
    const auto sol = solve_smv(p);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("solution scales with the data", "[solver]") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const RecoveryProblem p = toy_problem(seed, 0.05);
        RecoveryProblem q = p;
        const double c = 3.7;
        q.observation *= c;
        q.noise_var *= c * c;
        SolverConfig cfg;
        cfg.tol_primal = cfg.tol_dual = 1e-9;
        cfg.max_iter = 50000;
        const auto a = solve_smv(p, cfg), b = solve_smv(q, cfg);
        CHECK((b.g_matrix - c * a.g_matrix).norm() < 1e-6 * (1.0 + b.g_matrix.norm()));
        CHECK_THAT(b.objective, WithinRel(c * a.objective, 1e-6));
    }
}

TEST_CASE("admm meets the optimality conditions it reports", "[solver]") {
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        const RecoveryProblem p = toy_problem(seed, 0.05, 3);
        const auto sol = solve_smv(p);
        REQUIRE(sol.status == SolveStatus::Converged);
        const double rhs = p.radius() * p.radius();
        CHECK(sol.feasibility_gap <= 1e-6 * rhs);
        CHECK_THAT(sol.objective, WithinRel(recovery_objective(sol.g_matrix, p.epsilon), 1e-12));
        CHECK_THAT(residual_energy(p, sol.g_matrix) - rhs, WithinAbs(sol.feasibility_gap, 1e-9));
    }
}

TEST_CASE("admm agrees with a projected subgradient oracle", "[solver]") {
    for (std::uint64_t seed = 1000; seed < 1003; ++seed) {
        const RecoveryProblem p = toy_problem(seed, 0.05);
        const auto sol = solve_smv(p);
        const auto ref = oracle::projected_subgradient(p.subarray_manifolds, p.observation, p.radius(), p.epsilon,
                                                       40000, 2000);
        CHECK(std::abs(sol.objective - ref.objective) <= 1e-3 * ref.objective);
    }
}

TEST_CASE("deterministic for fixed inputs", "[solver]") {
    const RecoveryProblem p = toy_problem(30, 0.05);
    const auto a = solve_smv(p), b = solve_smv(p);
    CHECK(a.g_matrix == b.g_matrix);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("epsilon zero with one subarray is plain l1 recovery", "[solver]") {
    std::mt19937_64 rng(41);
    RecoveryProblem p;
    p.subarray_manifolds = {manifold(make_mra(6), Grid::uniform(0.125))};
    CMatrix g = CMatrix::Zero(16, 1);
    g(3, 0) = cplx(1.0, -0.5);
    g(11, 0) = cplx(-0.3, 0.8);
    p.observation = apply_stacked(p, g) + oracle::random_complex(6, 1, rng, 0.1);
    p.noise_var = 0.01;
    p.epsilon = 0.0;
    const auto sol = solve_smv(p);
    const auto ref = oracle::projected_subgradient(p.subarray_manifolds, p.observation, p.radius(), 0.0, 40000, 2000);
    CHECK(std::abs(sol.objective - ref.objective) <= 1e-3 * ref.objective);
    CHECK_THAT(sol.objective, WithinRel(sol.g_matrix.cwiseAbs().sum(), 1e-12));
}
