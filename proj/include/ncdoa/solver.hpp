#pragma once

#include <vector>

#include "ncdoa/types.hpp"

namespace ncdoa {

/// One snapshot of the noncoherent recovery problem
///
///   minimize    ||G||_{1,2} + epsilon ||G||_*
///   subject to  sum_l ||x_l - A_l g_l||^2 <= C M sigma^2
///
/// where g_l is column l of G (g x L) and x_l the rows of the observation
/// belonging to subarray l.
struct RecoveryProblem {
    std::vector<CMatrix> subarray_manifolds;
    CVector observation;
    double noise_var = 0.0;
    double c_const = 2.0;
    /// 0 selects the total sensor count.
    int m_const = 0;
    double epsilon = 1.0;

    void validate() const;

    Eigen::Index grid_size() const;
    Eigen::Index subarray_count() const { return static_cast<Eigen::Index>(subarray_manifolds.size()); }
    Eigen::Index total_rows() const;
    int effective_m() const;
    /// sqrt(C M sigma^2).
    double radius() const;
};

struct SolverConfig {
    double rho = 1.0;
    int max_iter = 5000;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    double over_relaxation = 1.0;
    /// Residual balancing: rescale rho by rho_scale when one residual
    /// exceeds the other by balance_ratio.
    bool adaptive_rho = true;
    double balance_ratio = 10.0;
    double rho_scale = 2.0;

    void validate() const;
};

enum class SolveStatus { Converged, MaxIter, Infeasible };

const char* to_string(SolveStatus status) noexcept;

struct RecoverySolution {
    CMatrix g_matrix;
    double objective = 0.0;
    /// Constraint LHS minus RHS; <= 0 when strictly feasible.
    double feasibility_gap = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double final_rho = 0.0;
};

/// Row-wise group soft thresholding, the prox of tau * ||.||_{1,2}.
CMatrix prox_row_l12(const CMatrix& m, double tau);
/// Singular value soft thresholding, the prox of tau * ||.||_*.
CMatrix prox_nuclear(const CMatrix& m, double tau);
/// Scales `residual` onto the l2 ball of the given radius if it lies outside.
CVector project_residual_ball(const CVector& residual, double radius);

double row_l12_norm(const CMatrix& m);
double nuclear_norm(const CMatrix& m);
double recovery_objective(const CMatrix& g, double epsilon);

/// blkdiag(A_1, ..., A_L) applied to the columns of G, stacked.
CVector apply_stacked(const RecoveryProblem& problem, const CMatrix& g);
/// Adjoint of apply_stacked.
CMatrix adjoint_stacked(const RecoveryProblem& problem, const CVector& r);
/// sum_l ||x_l - A_l g_l||^2.
double residual_energy(const RecoveryProblem& problem, const CMatrix& g);

/// ADMM on the consensus splitting Z1 = G (row prox), Z2 = G (nuclear prox),
/// Z3 = B G (residual ball). The G-update system does not depend on rho,
/// so its factorization is computed once per call.
RecoverySolution solve_smv(const RecoveryProblem& problem, const SolverConfig& config = {});

} // namespace ncdoa
