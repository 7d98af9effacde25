#include "ncdoa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncdoa/errors.hpp"

namespace ncdoa {

void RecoveryProblem::validate() const {
    if (subarray_manifolds.empty()) throw std::invalid_argument("RecoveryProblem: no subarray manifolds");
    const Eigen::Index g = subarray_manifolds.front().cols();
    if (g == 0) throw std::invalid_argument("RecoveryProblem: empty grid");
    for (const auto& a : subarray_manifolds) {
        if (a.cols() != g) throw std::invalid_argument("RecoveryProblem: manifolds must share the grid size");
        if (a.rows() == 0) throw std::invalid_argument("RecoveryProblem: empty subarray manifold");
    }
    if (observation.size() != total_rows()) {
        throw std::invalid_argument("RecoveryProblem: observation length must equal the total sensor count");
    }
    if (!(noise_var >= 0.0)) throw std::invalid_argument("RecoveryProblem: noise_var must be >= 0");
    if (!(c_const > 0.0)) throw std::invalid_argument("RecoveryProblem: C must be > 0");
    if (m_const < 0) throw std::invalid_argument("RecoveryProblem: M must be >= 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("RecoveryProblem: epsilon must be >= 0");
}

Eigen::Index RecoveryProblem::grid_size() const {
    return subarray_manifolds.empty() ? 0 : subarray_manifolds.front().cols();
}

Eigen::Index RecoveryProblem::total_rows() const {
    Eigen::Index n = 0;
    for (const auto& a : subarray_manifolds) n += a.rows();
    return n;
}

int RecoveryProblem::effective_m() const {
    return m_const > 0 ? m_const : static_cast<int>(total_rows());
}

double RecoveryProblem::radius() const {
    return std::sqrt(c_const * effective_m() * noise_var);
}

void SolverConfig::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("SolverConfig: rho must be > 0");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw std::invalid_argument("SolverConfig: tolerances must be > 0");
    if (!(over_relaxation >= 1.0 && over_relaxation <= 1.8)) {
        throw std::invalid_argument("SolverConfig: over_relaxation must be in [1, 1.8]");
    }
    if (!(balance_ratio > 1.0) || !(rho_scale > 1.0)) {
        throw std::invalid_argument("SolverConfig: balance_ratio and rho_scale must be > 1");
    }
}

const char* to_string(SolveStatus status) noexcept {
    switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

CMatrix prox_row_l12(const CMatrix& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_row_l12: tau must be >= 0");
    if (tau == 0.0) return m;
    const RVector norms = m.rowwise().norm();
    const RVector gain = (1.0 - tau / norms.array().max(tau)).matrix();
    return gain.asDiagonal() * m;
}

namespace {

// Thin matrices: shrink through the eigendecomposition of the L x L Gram
// matrix, M V diag(max(s - tau, 0) / s) V^H.
CMatrix prox_nuclear_gram(const CMatrix& m, double tau) {
    const CMatrix gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("prox_nuclear: eigendecomposition failed");
    const RVector lambda = eig.eigenvalues().cwiseMax(0.0);
    RVector gain(lambda.size());
    bool any = false;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double s = std::sqrt(lambda(i));
        gain(i) = s > tau ? (s - tau) / s : 0.0;
        any = any || gain(i) > 0.0;
    }
    if (!any) return CMatrix::Zero(m.rows(), m.cols());
    const CMatrix& v = eig.eigenvectors();
    return m * (v * gain.asDiagonal() * v.adjoint());
}

} // namespace

CMatrix prox_nuclear(const CMatrix& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_nuclear: tau must be >= 0");
    if (tau == 0.0 || m.size() == 0) return m;
    if (m.cols() <= 4 && m.rows() >= 4 * m.cols()) return prox_nuclear_gram(m, tau);
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("prox_nuclear: SVD failed");
    const RVector shrunk = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
    Eigen::Index rank = 0;
    while (rank < shrunk.size() && shrunk(rank) > 0.0) ++rank;
    if (rank == 0) return CMatrix::Zero(m.rows(), m.cols());
    return svd.matrixU().leftCols(rank) * shrunk.head(rank).asDiagonal() *
           svd.matrixV().leftCols(rank).adjoint();
}

CVector project_residual_ball(const CVector& residual, double radius) {
    if (radius < 0.0) throw std::invalid_argument("project_residual_ball: radius must be >= 0");
    const double norm = residual.norm();
    if (norm <= radius) return residual;
    if (radius == 0.0) return CVector::Zero(residual.size());
    return residual * (radius / norm);
}

double row_l12_norm(const CMatrix& m) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) s += m.row(r).norm();
    return s;
}

double nuclear_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

double recovery_objective(const CMatrix& g, double epsilon) {
    const double rows = row_l12_norm(g);
    return epsilon == 0.0 ? rows : rows + epsilon * nuclear_norm(g);
}

CVector apply_stacked(const RecoveryProblem& problem, const CMatrix& g) {
    CVector out(problem.total_rows());
    Eigen::Index off = 0;
    for (Eigen::Index l = 0; l < problem.subarray_count(); ++l) {
        const CMatrix& a = problem.subarray_manifolds[static_cast<std::size_t>(l)];
        out.segment(off, a.rows()).noalias() = a * g.col(l);
        off += a.rows();
    }
    return out;
}

CMatrix adjoint_stacked(const RecoveryProblem& problem, const CVector& r) {
    CMatrix out(problem.grid_size(), problem.subarray_count());
    Eigen::Index off = 0;
    for (Eigen::Index l = 0; l < problem.subarray_count(); ++l) {
        const CMatrix& a = problem.subarray_manifolds[static_cast<std::size_t>(l)];
        out.col(l).noalias() = a.adjoint() * r.segment(off, a.rows());
        off += a.rows();
    }
    return out;
}

double residual_energy(const RecoveryProblem& problem, const CMatrix& g) {
    return (problem.observation - apply_stacked(problem, g)).squaredNorm();
}

namespace {

// Residuals, stopping test and rho balancing run every few iterations; the
// dual residual is then measured over a single step.
constexpr int kCheckInterval = 5;

// G-update of the splitting: per subarray solve (2 I + A^H A) g = v + A^H q
// through the Woodbury identity
//   (2I + A^H A)^{-1} = (I - A^H K^{-1} A) / 2,  K = 2I + A A^H,
// which gives g = (v + A^H (q - y)) / 2 and A g = (A v + P (q - y)) / 2 with
// y = K^{-1} (A v + P q) and P = A A^H. Two products with A per column.
class ConsensusSystem {
public:
    explicit ConsensusSystem(const RecoveryProblem& problem) : problem_(problem) {
        for (const auto& a : problem.subarray_manifolds) {
            CMatrix gram = a * a.adjoint();
            CMatrix k = gram;
            k.diagonal().array() += 2.0;
            factors_.emplace_back(k);
            if (factors_.back().info() != Eigen::Success) {
                throw NumericalError("solve_smv: factorization of the consensus system failed");
            }
            grams_.push_back(std::move(gram));
        }
    }

    /// v: g x L, q: stacked N; writes g_out and its image b_out = B g_out.
    void solve(const CMatrix& v, const CVector& q, CMatrix& g_out, CVector& b_out) const {
        Eigen::Index off = 0;
        for (Eigen::Index l = 0; l < v.cols(); ++l) {
            const auto li = static_cast<std::size_t>(l);
            const CMatrix& a = problem_.subarray_manifolds[li];
            const Eigen::Index rows = a.rows();
            const CVector av = a * v.col(l);
            const CVector ql = q.segment(off, rows);
            const CVector y = factors_[li].solve(av + grams_[li] * ql);
            const CVector d = ql - y;
            g_out.col(l).noalias() = 0.5 * (v.col(l) + a.adjoint() * d);
            b_out.segment(off, rows).noalias() = 0.5 * (av + grams_[li] * d);
            off += rows;
        }
    }

private:
    const RecoveryProblem& problem_;
    std::vector<Eigen::LLT<CMatrix>> factors_;
    std::vector<CMatrix> grams_;
};

// Minimum-norm least squares per subarray; its residual is the smallest
// attainable constraint LHS.
CMatrix least_squares_fit(const RecoveryProblem& problem) {
    CMatrix g(problem.grid_size(), problem.subarray_count());
    Eigen::Index off = 0;
    for (Eigen::Index l = 0; l < problem.subarray_count(); ++l) {
        const CMatrix& a = problem.subarray_manifolds[static_cast<std::size_t>(l)];
        Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(a);
        g.col(l) = cod.solve(problem.observation.segment(off, a.rows()));
        off += a.rows();
    }
    return g;
}

} // namespace

RecoverySolution solve_smv(const RecoveryProblem& problem, const SolverConfig& config) {
    problem.validate();
    config.validate();

    const Eigen::Index g = problem.grid_size();
    const Eigen::Index l_count = problem.subarray_count();
    const Eigen::Index n = problem.total_rows();
    const CVector& x = problem.observation;
    const double radius = problem.radius();
    const double rhs_energy = radius * radius;
    const double eps = problem.epsilon;
    const double alpha = config.over_relaxation;

    RecoverySolution sol;

    const CMatrix ls = least_squares_fit(problem);
    const double min_energy = residual_energy(problem, ls);
    if (std::sqrt(min_energy) > radius + 1e-9 * (1.0 + x.norm())) {
        sol.g_matrix = ls;
        sol.objective = recovery_objective(ls, eps);
        sol.feasibility_gap = min_energy - rhs_energy;
        sol.status = SolveStatus::Infeasible;
        sol.final_rho = config.rho;
        return sol;
    }

    if (x.norm() <= radius) {
        // G = 0 is feasible and minimizes a norm objective.
        sol.g_matrix = CMatrix::Zero(g, l_count);
        sol.objective = 0.0;
        sol.feasibility_gap = x.squaredNorm() - rhs_energy;
        sol.status = SolveStatus::Converged;
        sol.final_rho = config.rho;
        return sol;
    }

    const ConsensusSystem system(problem);

    CMatrix gm = CMatrix::Zero(g, l_count);
    CMatrix z1 = gm, z2 = gm, u1 = gm, u2 = gm;
    CVector z3 = x, u3 = CVector::Zero(n);
    CMatrix rhs(g, l_count);
    double rho = config.rho;

    CMatrix h1(g, l_count), h2(g, l_count), z1_old(g, l_count), z2_old(g, l_count);
    CVector bg(n), h3(n), z3_old(n);

    for (int it = 1; it <= config.max_iter; ++it) {
        rhs = (z1 - u1) + (z2 - u2);
        system.solve(rhs, z3 - u3, gm, bg);

        h1 = alpha * gm + (1.0 - alpha) * z1;
        h2 = alpha * gm + (1.0 - alpha) * z2;
        h3 = alpha * bg + (1.0 - alpha) * z3;

        const bool check = it % kCheckInterval == 0 || it == config.max_iter;
        if (check) {
            z1_old = z1;
            z2_old = z2;
            z3_old = z3;
        }
        z1 = prox_row_l12(h1 + u1, 1.0 / rho);
        z2 = eps > 0.0 ? prox_nuclear(h2 + u2, eps / rho) : CMatrix(h2 + u2);
        z3 = x + project_residual_ball(h3 + u3 - x, radius);

        u1 += h1 - z1;
        u2 += h2 - z2;
        u3 += h3 - z3;
        sol.iterations = it;
        if (!check) continue;

        const double primal = std::sqrt((gm - z1).squaredNorm() + (gm - z2).squaredNorm() + (bg - z3).squaredNorm());
        const double dual =
            rho * ((z1 - z1_old) + (z2 - z2_old) + adjoint_stacked(problem, z3 - z3_old)).norm();
        const double scale_primal =
            std::max(std::sqrt(2.0 * gm.squaredNorm() + bg.squaredNorm()),
                     std::sqrt(z1.squaredNorm() + z2.squaredNorm() + z3.squaredNorm()));
        const double scale_dual = rho * (u1 + u2 + adjoint_stacked(problem, u3)).norm();
        const double eps_primal = config.tol_primal * (1.0 + scale_primal);
        const double eps_dual = config.tol_dual * (1.0 + scale_dual);

        sol.primal_residual = primal;
        sol.dual_residual = dual;

        if (primal <= eps_primal && dual <= eps_dual) {
            const double gap = (x - bg).squaredNorm() - rhs_energy;
            if (gap <= config.tol_primal * (1.0 + rhs_energy)) {
                sol.status = SolveStatus::Converged;
                break;
            }
        }

        if (config.adaptive_rho) {
            // Scaled duals u = y / rho must be rescaled with rho.
            if (primal > config.balance_ratio * dual) {
                rho *= config.rho_scale;
                u1 /= config.rho_scale;
                u2 /= config.rho_scale;
                u3 /= config.rho_scale;
            } else if (dual > config.balance_ratio * primal) {
                rho /= config.rho_scale;
                u1 *= config.rho_scale;
                u2 *= config.rho_scale;
                u3 *= config.rho_scale;
            }
        }
    }

    sol.g_matrix = gm;
    sol.objective = recovery_objective(gm, eps);
    sol.feasibility_gap = residual_energy(problem, gm) - rhs_energy;
    sol.final_rho = rho;
    return sol;
}

} // namespace ncdoa
