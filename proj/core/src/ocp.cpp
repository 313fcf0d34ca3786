#include "phoct/ocp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "phoct/linalg.hpp"

namespace phoct {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::not_reached: return "not_reached";
    }
    return "unknown";
}

namespace {

void validate_problem(const OCPProblem& prob) {
    if (prob.T <= 0.0) throw std::invalid_argument("OCPProblem: horizon T must be positive");
    if (prob.N < 1) throw std::invalid_argument("OCPProblem: N must be at least 1");
    if (prob.x0.size() != prob.sys.n()) {
        throw std::invalid_argument("OCPProblem: x0 dimension mismatch");
    }
    if (prob.eps_reg < 0.0) throw std::invalid_argument("OCPProblem: eps_reg must be nonnegative");
    if (const auto* tgt = std::get_if<TargetState>(&prob.terminal)) {
        if (tgt->x_T.size() != prob.sys.n()) {
            throw std::invalid_argument("OCPProblem: x_T dimension mismatch");
        }
    } else {
        const auto& tc = std::get<TerminalCost>(prob.terminal);
        const auto n = prob.sys.n();
        if (tc.x_ref.size() != n || tc.W.rows() != n || tc.W.cols() != n) {
            throw std::invalid_argument("OCPProblem: terminal cost dimension mismatch");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (tc.W + tc.W.transpose()));
        if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + tc.W.norm())) {
            throw std::invalid_argument("OCPProblem: terminal weight W must be PSD");
        }
    }
}

// State-eliminated view of the discrete problem. All passes are O(N·n·(n+m))
// and allocation-free after construction.
class Condensed {
public:
    Condensed(const PHSystem& sys, const Vector& x0, double T, int N, double eps_reg,
              const Terminal* terminal)
        : n_(sys.n()), m_(sys.m()), N_(N), h_(T / N), eps_(eps_reg), x0_(x0) {
        const DiscreteDynamics dd = discretize_zoh(sys, h_);
        Ad_ = dd.Ad;
        Bd_ = dd.Bd;
        Adt_ = Ad_.transpose();
        Bdt_ = Bd_.transpose();
        Q_ = sys.Q;
        const Matrix G = symmetric_sqrt_psd(sys.R) * sys.Q;
        D_ = G.transpose() * G;
        lo_ = sys.u_lo;
        hi_ = sys.u_hi;
        if (terminal != nullptr) {
            if (const auto* tgt = std::get_if<TargetState>(terminal)) {
                hard_target_ = true;
                x_T_ = tgt->x_T;
            } else {
                const auto& tc = std::get<TerminalCost>(*terminal);
                W_ = 0.5 * (tc.W + tc.W.transpose());
                x_ref_ = tc.x_ref;
                has_mayer_ = true;
            }
            with_cost_ = true;
        }
        X_.resize(n_, N_ + 1);
        DX_.resize(n_, N_ + 1);
        p_.resize(n_);
        tmp_.resize(n_);
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int N() const { return N_; }
    double h() const { return h_; }
    bool hard_target() const { return hard_target_; }
    const Vector& x_T() const { return x_T_; }

    Eigen::Map<const Matrix> as_grid(const Vector& u) const {
        return Eigen::Map<const Matrix>(u.data(), m_, N_);
    }

    void clamp(Vector& u) const {
        Eigen::Map<Matrix> U(u.data(), m_, N_);
        for (int k = 0; k < N_; ++k) {
            U.col(k) = U.col(k).cwiseMax(lo_).cwiseMin(hi_);
        }
    }

    const Matrix& forward(const Vector& u) {
        Eigen::Map<const Matrix> U(u.data(), m_, N_);
        X_.col(0) = x0_;
        for (int k = 0; k < N_; ++k) {
            X_.col(k + 1).noalias() = Ad_ * X_.col(k);
            X_.col(k + 1).noalias() += Bd_ * U.col(k);
        }
        return X_;
    }

    double weight(int k) const { return (k == 0 || k == N_) ? 0.5 : 1.0; }

    // Solver objective at u (no multiplier/penalty terms).
    double objective(const Vector& u) {
        forward(u);
        Eigen::Map<const Matrix> U(u.data(), m_, N_);
        double J = 0.0;
        if (with_cost_) {
            for (int k = 0; k <= N_; ++k) {
                J += h_ * weight(k) * X_.col(k).dot(D_ * X_.col(k));
            }
            J += 0.5 * X_.col(N_).dot(Q_ * X_.col(N_)) - 0.5 * x0_.dot(Q_ * x0_);
            if (has_mayer_) {
                const Vector e = X_.col(N_) - x_ref_;
                J += 0.5 * e.dot(W_ * e);
            }
            if (eps_ > 0.0) {
                J += eps_ * h_ * U.squaredNorm();
            }
        }
        return J;
    }

    // Gradient of the augmented Lagrangian
    //   L(u) = J(u) + λᵀ(x_N - x_T) + ρ/2 ‖x_N - x_T‖²
    // at u; also reports x_N. Runs the forward pass itself.
    void gradient(const Vector& u, const Vector* lambda, double rho, Vector& grad) {
        forward(u);
        Eigen::Map<const Matrix> U(u.data(), m_, N_);
        grad.resize(m_ * N_);
        Eigen::Map<Matrix> Gr(grad.data(), m_, N_);

        p_.setZero();
        if (with_cost_) {
            p_.noalias() = Q_ * X_.col(N_);
            p_.noalias() += (2.0 * h_ * weight(N_)) * (D_ * X_.col(N_));
            if (has_mayer_) p_.noalias() += W_ * (X_.col(N_) - x_ref_);
        }
        if (lambda != nullptr) p_ += *lambda;
        if (rho != 0.0) p_.noalias() += rho * (X_.col(N_) - x_T_);

        for (int k = N_ - 1; k >= 0; --k) {
            Gr.col(k).noalias() = Bdt_ * p_;
            if (eps_ > 0.0) Gr.col(k) += (2.0 * eps_ * h_) * U.col(k);
            if (k > 0) {
                tmp_.noalias() = Adt_ * p_;
                p_ = tmp_;
                if (with_cost_) p_.noalias() += (2.0 * h_ * weight(k)) * (D_ * X_.col(k));
            }
        }
    }

    Vector terminal_state() const { return X_.col(N_); }

    // Gradient of the endpoint objective ½‖x_N(u) - target‖²; returns the
    // endpoint gap norm. Ignores all cost weights.
    double reach_gradient(const Vector& u, const Vector& target, Vector& grad) {
        forward(u);
        grad.resize(m_ * N_);
        Eigen::Map<Matrix> Gr(grad.data(), m_, N_);
        p_ = X_.col(N_) - target;
        const double gap = p_.norm();
        for (int k = N_ - 1; k >= 0; --k) {
            Gr.col(k).noalias() = Bdt_ * p_;
            if (k > 0) {
                tmp_.noalias() = Adt_ * p_;
                p_ = tmp_;
            }
        }
        return gap;
    }

    // Hessian-vector product of the cost part (rho = 0) or the pure terminal
    // penalty part (cost off, rho = 1); both are PSD quadratics.
    void hessvec(const Vector& v, bool cost_part, Vector& out) {
        Eigen::Map<const Matrix> Vg(v.data(), m_, N_);
        DX_.col(0).setZero();
        for (int k = 0; k < N_; ++k) {
            DX_.col(k + 1).noalias() = Ad_ * DX_.col(k);
            DX_.col(k + 1).noalias() += Bd_ * Vg.col(k);
        }
        out.resize(m_ * N_);
        Eigen::Map<Matrix> O(out.data(), m_, N_);

        p_.setZero();
        if (cost_part && with_cost_) {
            p_.noalias() = Q_ * DX_.col(N_);
            p_.noalias() += (2.0 * h_ * weight(N_)) * (D_ * DX_.col(N_));
            if (has_mayer_) p_.noalias() += W_ * DX_.col(N_);
        } else if (!cost_part) {
            p_ = DX_.col(N_);
        }
        for (int k = N_ - 1; k >= 0; --k) {
            O.col(k).noalias() = Bdt_ * p_;
            if (cost_part && eps_ > 0.0) O.col(k) += (2.0 * eps_ * h_) * Vg.col(k);
            if (k > 0) {
                tmp_.noalias() = Adt_ * p_;
                p_ = tmp_;
                if (cost_part && with_cost_) p_.noalias() += (2.0 * h_ * weight(k)) * (D_ * DX_.col(k));
            }
        }
    }

    double power_iteration(bool cost_part, int iters = 50) {
        Vector v(m_ * N_);
        std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
        }
        v.normalize();
        Vector w;
        double lam = 0.0;
        for (int it = 0; it < iters; ++it) {
            hessvec(v, cost_part, w);
            lam = w.norm();
            if (lam < 1e-300) return 0.0;
            v = w / lam;
        }
        return lam;
    }

private:
    int n_, m_, N_;
    double h_, eps_;
    Vector x0_;
    Matrix Ad_, Bd_, Adt_, Bdt_, Q_, D_, W_;
    Vector lo_, hi_, x_T_, x_ref_;
    bool hard_target_ = false;
    bool has_mayer_ = false;
    bool with_cost_ = false;
    Matrix X_, DX_;
    Vector p_, tmp_;
};

struct ApgResult {
    double stationarity = 0.0;
    long iterations = 0;
};

// Accelerated projected gradient with gradient-mapping restart; fixed step
// 1/L. Stationarity is the unit-step projected-gradient residual in sup norm.
ApgResult apg(Condensed& op, Vector& u, const Vector* lambda, double rho, double L, double tol,
              long max_iter) {
    const double step = 1.0 / std::max(L, 1e-12);
    op.clamp(u);
    Vector w = u;
    Vector u_new(u.size()), grad(u.size());
    double tt = 1.0;
    ApgResult res;
    const long check_every = 10;
    for (long it = 1; it <= max_iter; ++it) {
        op.gradient(w, lambda, rho, grad);
        u_new = w - step * grad;
        op.clamp(u_new);
        if ((w - u_new).dot(u_new - u) > 0.0) {
            tt = 1.0;
            w = u_new;
        } else {
            const double tt_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tt * tt));
            w = u_new + ((tt - 1.0) / tt_next) * (u_new - u);
            tt = tt_next;
        }
        u = u_new;
        res.iterations = it;
        if (it % check_every == 0 || it == max_iter) {
            op.gradient(u, lambda, rho, grad);
            Vector trial = u - grad;
            op.clamp(trial);
            res.stationarity = (u - trial).cwiseAbs().maxCoeff();
            if (res.stationarity <= tol) break;
        }
    }
    return res;
}

Trajectory build_trajectory(const PHSystem& sys, const Vector& x0, const Condensed& op,
                            const Vector& u) {
    return simulate(sys, x0, op.as_grid(u), op.h());
}

}  // namespace

TranscribedQP transcribe(const OCPProblem& prob) {
    validate_problem(prob);
    const int n = prob.sys.n();
    const int m = prob.sys.m();
    const int N = prob.N;
    const long nu = static_cast<long>(m) * N;
    if (nu > 3000) {
        throw std::invalid_argument(
            "transcribe: condensed Hessian too large for dense assembly; use solve_ocp");
    }
    const double h = prob.T / N;
    const DiscreteDynamics dd = discretize_zoh(prob.sys, h);
    const Matrix Gs = symmetric_sqrt_psd(prob.sys.R) * prob.sys.Q;
    const Matrix D = Gs.transpose() * Gs;

    TranscribedQP qp;
    qp.H = Matrix::Zero(nu, nu);
    qp.g = Vector::Zero(nu);
    qp.constant = -0.5 * prob.x0.dot(prob.sys.Q * prob.x0);
    qp.lo.resize(nu);
    qp.hi.resize(nu);
    for (int k = 0; k < N; ++k) {
        qp.lo.segment(k * m, m) = prob.sys.u_lo;
        qp.hi.segment(k * m, m) = prob.sys.u_hi;
    }

    Matrix G = Matrix::Zero(n, nu);  // ∂x_k/∂u
    Vector a = prob.x0;              // zero-input response
    for (int k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 0.5 : 1.0;
        if (k > 0) {
            qp.H.noalias() += (2.0 * h * w) * (G.transpose() * D * G);
            qp.g.noalias() += (2.0 * h * w) * (G.transpose() * (D * a));
        }
        qp.constant += h * w * a.dot(D * a);
        if (k == N) {
            qp.H.noalias() += G.transpose() * prob.sys.Q * G;
            qp.g.noalias() += G.transpose() * (prob.sys.Q * a);
            qp.constant += 0.5 * a.dot(prob.sys.Q * a);
            if (const auto* tgt = std::get_if<TargetState>(&prob.terminal)) {
                qp.E = G;
                qp.r = tgt->x_T - a;
                qp.has_terminal_equality = true;
            } else {
                const auto& tc = std::get<TerminalCost>(prob.terminal);
                const Matrix W = 0.5 * (tc.W + tc.W.transpose());
                qp.H.noalias() += G.transpose() * W * G;
                qp.g.noalias() += G.transpose() * (W * (a - tc.x_ref));
                qp.constant += 0.5 * (a - tc.x_ref).dot(W * (a - tc.x_ref));
            }
            break;
        }
        G = dd.Ad * G;
        G.block(0, k * m, n, m) = dd.Bd;
        a = dd.Ad * a;
    }
    if (prob.eps_reg > 0.0) {
        qp.H.diagonal().array() += 2.0 * prob.eps_reg * h;
    }
    return qp;
}

OCPSolution solve_ocp(const OCPProblem& prob, const SolveOptions& opts) {
    validate_problem(prob);
    const int m = prob.sys.m();
    const int N = prob.N;
    Condensed op(prob.sys, prob.x0, prob.T, N, prob.eps_reg, &prob.terminal);

    Vector u = Vector::Zero(static_cast<long>(m) * N);
    if (opts.warm_start.size() > 0) {
        if (opts.warm_start.rows() != m || opts.warm_start.cols() != N) {
            throw std::invalid_argument("solve_ocp: warm start has wrong shape");
        }
        u = Eigen::Map<const Vector>(opts.warm_start.data(), m * N);
    }
    op.clamp(u);

    OCPSolution sol;
    const double L_cost = op.power_iteration(true);

    if (!op.hard_target()) {
        const ApgResult r =
            apg(op, u, nullptr, 0.0, 1.05 * L_cost, opts.tol_stat, opts.max_inner);
        sol.iterations = r.iterations;
        sol.outer_iterations = 0;
        sol.stationarity = r.stationarity;
        sol.status =
            r.stationarity <= opts.tol_stat ? SolveStatus::converged : SolveStatus::max_iter;
        op.forward(u);
        const auto& tc = std::get<TerminalCost>(prob.terminal);
        sol.multiplier_terminal = 0.5 * (tc.W + tc.W.transpose()) * (op.terminal_state() - tc.x_ref);
        sol.terminal_residual = 0.0;
    } else {
        const double L_pen = op.power_iteration(false);
        const double tol_eq = opts.tol_eq * (1.0 + op.x_T().norm());
        Vector lambda = Vector::Zero(prob.sys.n());
        double rho = opts.penalty_init;
        bool converged = false;
        double feas = std::numeric_limits<double>::infinity();
        for (int outer = 1; outer <= opts.max_outer; ++outer) {
            sol.outer_iterations = outer;
            const double L = 1.05 * (L_cost + rho * L_pen);
            const double tol_inner =
                std::max(opts.tol_stat, 1e-2 * std::pow(0.1, outer - 1));
            const ApgResult r = apg(op, u, &lambda, rho, L, tol_inner, opts.max_inner);
            sol.iterations += r.iterations;
            sol.stationarity = r.stationarity;
            op.forward(u);
            const Vector gap = op.terminal_state() - op.x_T();
            feas = gap.norm();
            lambda += rho * gap;
            if (feas <= tol_eq && r.stationarity <= opts.tol_stat) {
                converged = true;
                break;
            }
            rho = std::min(rho * opts.penalty_growth, opts.penalty_cap);
        }
        sol.multiplier_terminal = lambda;
        sol.terminal_residual = feas;
        if (converged) {
            sol.status = SolveStatus::converged;
        } else if (rho >= opts.penalty_cap && feas > tol_eq) {
            sol.status = SolveStatus::infeasible;
        } else {
            sol.status = SolveStatus::max_iter;
        }
    }

    sol.traj = build_trajectory(prob.sys, prob.x0, op, u);
    sol.cost_primal = cost_via_balance(prob.sys, sol.traj);
    sol.cost_supply = cost_supplied_energy(sol.traj);
    sol.objective = op.objective(u);
    return sol;
}

OCPSolution solve_regularized(const OCPProblem& prob, const SolveOptions& opts) {
    if (prob.eps_reg <= 0.0) {
        throw std::invalid_argument("solve_regularized: eps_reg must be positive");
    }
    if (!std::holds_alternative<TerminalCost>(prob.terminal)) {
        throw std::invalid_argument("solve_regularized: requires a terminal-cost problem");
    }
    return solve_ocp(prob, opts);
}

ReachResult solve_reach(const PHSystem& sys, const Vector& x0, const Vector& x_T, double T, int N,
                        long max_inner) {
    if (x_T.size() != sys.n()) throw std::invalid_argument("solve_reach: x_T dimension mismatch");
    Condensed op(sys, x0, T, N, 0.0, nullptr);  // endpoint objective only
    Vector u = Vector::Zero(static_cast<long>(sys.m()) * N);
    const double step = 1.0 / std::max(1.05 * op.power_iteration(false), 1e-12);

    Vector w = u, u_new(u.size()), grad(u.size());
    double tt = 1.0;
    ReachResult res;
    const double gap_floor = 1e-9 * (1.0 + x_T.norm());
    for (long it = 1; it <= max_inner; ++it) {
        op.reach_gradient(w, x_T, grad);
        u_new = w - step * grad;
        op.clamp(u_new);
        if ((w - u_new).dot(u_new - u) > 0.0) {
            tt = 1.0;
            w = u_new;
        } else {
            const double tt_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tt * tt));
            w = u_new + ((tt - 1.0) / tt_next) * (u_new - u);
            tt = tt_next;
        }
        u = u_new;
        res.iterations = it;
        if (it % 10 == 0 || it == max_inner) {
            const double gap = op.reach_gradient(u, x_T, grad);
            if (gap <= gap_floor) break;
            Vector trial = u - grad;
            op.clamp(trial);
            if ((u - trial).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + gap)) break;
        }
    }
    res.residual = op.reach_gradient(u, x_T, grad);
    res.U = op.as_grid(u);
    return res;
}

TimeOptimalResult solve_time_optimal(const PHSystem& sys, const Vector& x0, const Vector& x_T,
                                     const TimeOptimalOptions& opts) {
    const double struct_tol = kDefaultStructTol * (1.0 + sys.R.norm());
    if (sys.R.norm() > struct_tol) {
        throw std::invalid_argument("solve_time_optimal: system must be lossless (R = 0)");
    }
    const Matrix A = sys.dynamics_matrix();
    Matrix kalman(sys.n(), static_cast<long>(sys.n()) * sys.m());
    Matrix Ak = Matrix::Identity(sys.n(), sys.n());
    for (int k = 0; k < sys.n(); ++k) {
        kalman.block(0, static_cast<long>(k) * sys.m(), sys.n(), sys.m()) = Ak * sys.B;
        Ak = A * Ak;
    }
    if (numeric_rank(kalman) < sys.n()) {
        throw std::invalid_argument("solve_time_optimal: system is not controllable");
    }

    TimeOptimalResult res;
    const double tol = opts.tol_eq * (1.0 + x_T.norm());
    if ((x0 - x_T).norm() <= tol) {
        res.T_min = 0.0;
        res.T_infeasible_below = 0.0;
        res.residual = (x0 - x_T).norm();
        res.status = SolveStatus::converged;
        res.traj.h = 0.0;
        res.traj.t = Vector::Zero(1);
        res.traj.X = x0;
        res.traj.U = Matrix::Zero(sys.m(), 0);
        res.traj.Y = sys.B.transpose() * (sys.Q * x0);
        return res;
    }

    auto grid_for = [&](double T) {
        return std::max(opts.min_grid, static_cast<int>(std::ceil(opts.grid_density * T)));
    };
    auto probe = [&](double T, ReachResult& out) {
        out = solve_reach(sys, x0, x_T, T, grid_for(T), opts.max_inner);
        res.iterations += out.iterations;
        return out.residual <= tol;
    };

    double lo = 0.0;
    double hi = -1.0;
    ReachResult feasible_sol;
    double T = opts.coarse_T0;
    while (T <= opts.T_cap) {
        ReachResult r;
        if (probe(T, r)) {
            hi = T;
            feasible_sol = r;
            break;
        }
        lo = T;
        T *= 2.0;
    }
    if (hi < 0.0) {
        res.status = SolveStatus::not_reached;
        res.T_infeasible_below = lo;
        res.T_min = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    for (int it = 0; it < opts.bisection_steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        ReachResult r;
        if (probe(mid, r)) {
            hi = mid;
            feasible_sol = r;
        } else {
            lo = mid;
        }
    }
    res.T_min = hi;
    res.T_infeasible_below = lo;
    res.residual = feasible_sol.residual;
    res.status = SolveStatus::converged;
    res.traj = simulate(sys, x0, feasible_sol.U, hi / feasible_sol.U.cols());
    return res;
}

}  // namespace phoct
