#include "rtcbf/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtcbf/hocbf.hpp"
#include "rtcbf/system.hpp"

namespace rtcbf {

namespace {

double wrap_pi(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

int ego_degree(const Agent& a) {
    return a.kind == AgentKind::DoubleIntegrator ? 2 : 1;
}

ControlAffineSystem agent_system(const Agent& a) {
    ControlAffineSystem sys;
    switch (a.kind) {
        case AgentKind::Unicycle:
            sys.state_dim = 3;
            sys.input_dim = 2;
            sys.drift = [](double, const Eigen::VectorXd&) {
                return Eigen::VectorXd::Zero(3).eval();
            };
            sys.input_map = [](double, const Eigen::VectorXd& x) {
                Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 2);
                g(0, 0) = std::cos(x(2));
                g(1, 0) = std::sin(x(2));
                g(2, 1) = 1.0;
                return g;
            };
            break;
        case AgentKind::DoubleIntegrator:
            sys.state_dim = 4;
            sys.input_dim = 2;
            sys.drift = [](double, const Eigen::VectorXd& x) {
                Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
                f.head<2>() = x.segment<2>(2);
                return f;
            };
            sys.input_map = [](double, const Eigen::VectorXd&) {
                Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 2);
                g.bottomRows(2).setIdentity();
                return g;
            };
            break;
        case AgentKind::SingleIntegrator:
            sys.state_dim = 2;
            sys.input_dim = 2;
            sys.drift = [](double, const Eigen::VectorXd&) {
                return Eigen::VectorXd::Zero(2).eval();
            };
            sys.input_map = [](double, const Eigen::VectorXd&) {
                return Eigen::MatrixXd::Identity(2, 2).eval();
            };
            break;
    }
    set_box_input(sys, a.u_lo, a.u_hi);
    return sys;
}

Eigen::Vector2d agent_pos(const Agent& a, const Eigen::VectorXd& x) {
    (void)a;
    return x.head<2>();
}

// Collision-point barrier between an ego and one neighbor whose motion is
// frozen to a straight line from the snapshot at t0.
BarrierSpec pair_barrier(const Agent& ego, const Observation& obs, double t0,
                         double d_min) {
    BarrierSpec spec;
    const double d2 = d_min * d_min;
    const Eigen::Vector2d pj0 = obs.pos, wj = obs.vel;
    if (ego.kind == AgentKind::Unicycle) {
        // Separation barrier with a heading term: facing the neighbor
        // depresses h, so the constraint activates earlier head-on and the
        // row keeps a usable steering component near alignment.
        const double sigma = ego.sigma;
        spec.relative_degree = 1;
        spec.oracle = [=](double t, const Eigen::VectorXd& x) {
            const Eigen::Vector2d pj = pj0 + wj * (t - t0);
            const double c = std::cos(x(2)), s = std::sin(x(2));
            const Eigen::Vector2d d = x.head<2>() - pj;
            const double D2 = d.squaredNorm();
            const double bearing =
                wrap_pi(std::atan2(-d.y(), -d.x()) - x(2));
            const Eigen::Vector2d grad_p =
                2.0 * d + (sigma * std::sin(bearing) / D2) *
                              Eigen::Vector2d(-d.y(), d.x());
            BarrierSample out;
            out.h_derivs = Eigen::VectorXd::Constant(
                1, D2 - d2 - sigma * (1.0 + std::cos(bearing)));
            out.a = -grad_p.dot(wj);
            out.B.resize(2);
            out.B << grad_p.dot(Eigen::Vector2d(c, s)),
                -sigma * std::sin(bearing);
            return out;
        };
    } else if (ego.kind == AgentKind::DoubleIntegrator) {
        spec.relative_degree = 2;
        spec.oracle = [=](double t, const Eigen::VectorXd& x) {
            const Eigen::Vector2d pj = pj0 + wj * (t - t0);
            const Eigen::Vector2d d = x.head<2>() - pj;
            const Eigen::Vector2d vrel = x.segment<2>(2) - wj;
            BarrierSample out;
            out.h_derivs.resize(2);
            out.h_derivs << d.squaredNorm() - d2, 2.0 * d.dot(vrel);
            out.a = 2.0 * vrel.squaredNorm();
            out.B = 2.0 * d.transpose();
            return out;
        };
    } else {
        throw std::invalid_argument("pair_barrier: scripted agent as ego");
    }
    return spec;
}

// d(psi^{k-1})/d(p_j) for the pair barrier above.
Eigen::RowVectorXd neighbor_row(const Agent& ego, const Eigen::VectorXd& x,
                                const Eigen::Vector2d& pj,
                                const Eigen::Vector2d& wj, double nu1,
                                int k) {
    if (ego.kind == AgentKind::Unicycle) {
        const Eigen::Vector2d d = x.head<2>() - pj;
        const double bearing = wrap_pi(std::atan2(-d.y(), -d.x()) - x(2));
        const Eigen::Vector2d grad_p =
            2.0 * d + (ego.sigma * std::sin(bearing) / d.squaredNorm()) *
                          Eigen::Vector2d(-d.y(), d.x());
        return -grad_p.transpose();
    }
    const Eigen::Vector2d d = x.head<2>() - pj;
    if (k == 1) return -2.0 * d.transpose();
    const Eigen::Vector2d vrel = x.segment<2>(2) - wj;
    return -2.0 * vrel.transpose() - 2.0 * nu1 * d.transpose();
}

Eigen::VectorXd ego_reference(const Agent& ego, const Eigen::VectorXd& x) {
    Eigen::VectorXd u(2);
    if (ego.kind == AgentKind::Unicycle) {
        const Eigen::Vector2d to_goal = ego.goal - x.head<2>();
        const double dist = to_goal.norm();
        const double e = dist > 1e-9
                             ? wrap_pi(std::atan2(to_goal.y(), to_goal.x()) -
                                       x(2))
                             : 0.0;
        u(0) = std::clamp(ego.k_v * dist * std::cos(e), ego.u_lo(0),
                          ego.u_hi(0));
        u(1) = std::clamp(ego.k_w * e, ego.u_lo(1), ego.u_hi(1));
    } else {
        const Eigen::Vector2d a =
            ego.k_p * (ego.goal - x.head<2>()) - ego.k_d * x.segment<2>(2);
        u(0) = std::clamp(a.x(), ego.u_lo(0), ego.u_hi(0));
        u(1) = std::clamp(a.y(), ego.u_lo(1), ego.u_hi(1));
    }
    return u;
}

}  // namespace

AgentStepResult decentralized_agent_step(
    const MultiAgentWorld& world, int idx, const Eigen::VectorXd& ego_state,
    const std::vector<Observation>& observations,
    const std::vector<ClassKChain>& chains, double t) {
    const Agent& ego = world.agents[idx];
    const MultiAgentParams& prm = world.params;
    const int r = ego_degree(ego);
    const int n = static_cast<int>(observations.size());

    AgentStepResult res;
    res.chains = chains;

    ControlProblem pb;
    pb.system = agent_system(ego);
    for (int j = 0; j < n; ++j)
        pb.barriers.push_back(pair_barrier(ego, observations[j], t, prm.d_min));
    pb.reference = [&ego](double, const Eigen::VectorXd& x) {
        return ego_reference(ego, x);
    };

    const StepResult qp = controller_qp(pb, chains, t, ego_state);
    res.h.resize(n);
    for (int j = 0; j < n; ++j) res.h[j] = qp.stacks[j].psi(0);
    if (!qp.ok) {
        res.reason = FailureReason::Incompatible;
        return res;
    }
    res.ok = true;
    res.u = qp.u;
    if (!prm.adaptation) return res;

    // Constraint rows (<= form) of every pair at the current sample, used as
    // "all other pairs" feasibility sets in the best-case LP.
    const int q_rows = static_cast<int>(pb.system.input_A.rows());
    Eigen::MatrixXd rows(n, 2);
    Eigen::VectorXd rhs(n);
    for (int j = 0; j < n; ++j) {
        const LinearConstraintRow row =
            hocbf_row(qp.stacks[j], chains[j].nu(r));
        rows.row(j) = -row.c;
        rhs(j) = -row.d;
    }

    res.trust.assign(n, std::vector<TrustState>(r));
    std::vector<std::vector<double>> nu_d(n, std::vector<double>(r));
    bool lp_infeasible = false;
    for (int j = 0; j < n && !lp_infeasible; ++j) {
        const Eigen::Vector2d pj = observations[j].pos;
        const Eigen::Vector2d wj = observations[j].vel;
        double rate_prev = 0.0;
        for (int k = 1; k <= r; ++k) {
            Eigen::MatrixXd G(n - 1 + q_rows, 2);
            Eigen::VectorXd w(n - 1 + q_rows);
            int at = 0;
            for (int l = 0; l < n; ++l) {
                if (l == j) continue;
                G.row(at) = rows.row(l);
                w(at) = rhs(l);
                ++at;
            }
            G.bottomRows(q_rows) = pb.system.input_A;
            w.tail(q_rows) = pb.system.input_b;

            const Eigen::RowVectorXd A =
                neighbor_row(ego, ego_state, pj, wj, chains[j].nu(1), k);
            const double nb_part = A.dot(wj);
            const double param_actual =
                k == 2 ? chains[j].nu_derivative(1, 1) * qp.stacks[j].psi(0)
                       : 0.0;
            double drift;
            Eigen::RowVectorXd input_row = Eigen::RowVectorXd::Zero(2);
            if (k < r) {
                drift = qp.stacks[j].psi_dot(k - 1) - nb_part;
            } else {
                drift = qp.stacks[j].a_psi - nb_part - param_actual;
                input_row = qp.stacks[j].B_psi;
            }
            const BestCaseResult bc = best_case_ego(drift, input_row, G, w);
            if (!bc.feasible) {
                lp_infeasible = true;
                break;
            }
            const double param_rate =
                k == 2 ? qp.stacks[j].psi(0) * rate_prev : 0.0;
            TrustState ts = neighbor_halfspace_and_margin(
                A, chains[j].nu(k), qp.stacks[j].psi(k - 1), param_rate,
                bc.value, wj);
            // Observation j is the j-th agent in world order, skipping the
            // ego itself.
            const int nb = j < idx ? j : j + 1;
            Eigen::Vector2d belief;
            const auto bit = world.beliefs.find({idx, nb});
            if (bit != world.beliefs.end()) {
                belief = bit->second;
            } else {
                const Eigen::Vector2d d = agent_pos(ego, ego_state) - pj;
                belief = d.norm() > 1e-9 ? Eigen::Vector2d(d.normalized())
                                         : Eigen::Vector2d(1.0, 0.0);
            }
            trust_scores(ts, belief, A.transpose(), wj, prm.beta,
                         prm.rho_m_bar);
            rate_prev = alpha_rate_from_trust(ts.rho, prm.trust_gain);
            nu_d[j][k - 1] = std::max(chains[j].nu_min(),
                                      chains[j].nu(k) + rate_prev * prm.dt);
            res.trust[j][k - 1] = ts;
        }
    }
    if (lp_infeasible) {
        // The ego cannot satisfy the remaining constraints at all: distrust
        // every neighbor and relax.
        for (int j = 0; j < n; ++j)
            for (int k = 1; k <= r; ++k) {
                res.trust[j][k - 1].rho = -1.0;
                nu_d[j][k - 1] =
                    std::max(chains[j].nu_min(),
                             chains[j].nu(k) - prm.trust_gain * prm.dt);
            }
    }

    try {
        const Eigen::VectorXd x_pred =
            step_plant(pb.system, t, ego_state, res.u, prm.dt);
        const double tn = t + prm.dt;
        // Steers order k of pair j to its target over dt and advances only
        // that order's stack; the rest of the chain keeps its time-t values
        // until its own turn.
        const auto advance_order = [&](int j, int k, double target) {
            const double w = top_derivative(res.chains[j].stack(k), target,
                                            prm.dt, prm.top_derivative_clamp);
            std::vector<double> ws(r, 0.0);
            ws[k - 1] = w;
            const ClassKChain adv =
                integrate_theta_chain(res.chains[j], ws, prm.dt);
            res.chains[j].raw_stacks()[k - 1] = adv.stack(k);
        };
        // Orders update in sequence: psi^{k-1}(t+dt) depends only on orders
        // below k, so each sampled bound sees the already-advanced lower
        // part of the chain.
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d pj =
                observations[j].pos + observations[j].vel * prm.dt;
            for (int k = 1; k < r; ++k) {
                const DerivedBarrierStack nx = derived_barriers(
                    pb.barriers[j], res.chains[j], tn, x_pred);
                const Eigen::RowVectorXd A_k =
                    neighbor_row(ego, x_pred, pj, observations[j].vel,
                                 res.chains[j].nu(1), k);
                const double target = sampled_target(
                    nx.psi(k - 1),
                    nx.psi_dot(k - 1) - A_k.norm() * prm.delta_f,
                    nu_d[j][k - 1], prm.k_margin);
                advance_order(j, k, target);
            }
        }
        std::vector<DerivedBarrierStack> next(n);
        for (int j = 0; j < n; ++j) {
            next[j] =
                derived_barriers(pb.barriers[j], res.chains[j], tn, x_pred);
            const Eigen::Vector2d pj =
                observations[j].pos + observations[j].vel * prm.dt;
            const Eigen::RowVectorXd A_top =
                neighbor_row(ego, x_pred, pj, observations[j].vel,
                             res.chains[j].nu(1), r);
            // Worst admissible neighbor-velocity change over one sample.
            next[j].a_psi -= A_top.norm() * prm.delta_f;
        }
        std::vector<double> bounds(n);
        if (n == 1) {
            bounds[0] = nu_final_bound_single(next[0], pb.system.input_A,
                                              pb.system.input_b);
        } else {
            std::vector<const DerivedBarrierStack*> ptrs;
            for (const auto& s : next) ptrs.push_back(&s);
            bounds = nu_final_bounds_multi(ptrs, pb.system.input_A,
                                           pb.system.input_b);
        }
        for (int j = 0; j < n; ++j)
            advance_order(j, r,
                          std::max(prm.k_margin * bounds[j], nu_d[j][r - 1]));
    } catch (const SingularBoundary&) {
        res.ok = false;
        res.reason = FailureReason::Boundary;
    }
    return res;
}

SimLog run_multi_agent(const MultiAgentWorld& world) {
    const MultiAgentParams& prm = world.params;
    const int na = static_cast<int>(world.agents.size());

    std::vector<int> egos;
    for (int i = 0; i < na; ++i)
        if (world.agents[i].role == AgentRole::Ego) egos.push_back(i);

    std::vector<ControlAffineSystem> systems;
    for (const Agent& a : world.agents) systems.push_back(agent_system(a));

    SimLog log;
    log.columns.push_back("t");
    for (const Agent& a : world.agents)
        for (int i = 0; i < a.state.size(); ++i)
            log.columns.push_back(a.name + "_s" + std::to_string(i));
    for (int e : egos)
        for (int j = 0; j < 2; ++j)
            log.columns.push_back(world.agents[e].name + "_u" +
                                  std::to_string(j));
    for (int e : egos) {
        const int r = ego_degree(world.agents[e]);
        for (int j = 0; j < na; ++j) {
            if (j == e) continue;
            const std::string pair =
                world.agents[e].name + "_" + world.agents[j].name;
            log.barrier_names.push_back(pair);
            log.columns.push_back("h_" + pair);
            for (int k = 1; k <= r; ++k)
                log.columns.push_back("nu" + std::to_string(k) + "_" + pair);
            for (int k = 1; k <= r; ++k)
                log.columns.push_back("rho" + std::to_string(k) + "_" + pair);
        }
    }
    for (int e : egos)
        log.columns.push_back("goaldist_" + world.agents[e].name);
    log.per_barrier_min_h.assign(log.barrier_names.size(),
                                 std::numeric_limits<double>::infinity());
    log.min_h = std::numeric_limits<double>::infinity();
    log.status = RunStatus::Completed;
    log.t_fail = prm.horizon;

    // Per ego, one chain per neighbor in world order.
    std::vector<std::vector<ClassKChain>> chains(egos.size());
    for (size_t e = 0; e < egos.size(); ++e) {
        const int r = ego_degree(world.agents[egos[e]]);
        std::vector<double> init;
        if (r == 1)
            init = {prm.nu_init_r1};
        else
            init.assign(prm.nu_init.begin(), prm.nu_init.begin() + r);
        chains[e].assign(na - 1, ClassKChain(r, init));
    }

    std::vector<Eigen::VectorXd> state;
    std::vector<Eigen::VectorXd> last_u;
    for (const Agent& a : world.agents) {
        state.push_back(a.state);
        last_u.push_back(Eigen::VectorXd::Zero(2));
    }

    const long steps = std::lround(prm.horizon / prm.dt);
    bool reached = false;
    for (long s = 0; s <= steps; ++s) {
        const double t = s * prm.dt;

        // Scripted inputs first; their current velocity is observable.
        std::vector<Eigen::VectorXd> u_now = last_u;
        for (int i = 0; i < na; ++i) {
            const Agent& a = world.agents[i];
            if (a.role == AgentRole::Adversarial) {
                if (a.chase_gain > 0.0 && t < a.chase_until) {
                    const Eigen::Vector2d to_target =
                        state[a.target].head<2>() - state[i].head<2>();
                    Eigen::Vector2d v = a.chase_gain * to_target;
                    if (v.norm() > a.speed_cap) v *= a.speed_cap / v.norm();
                    u_now[i] = v;
                } else if (a.chase_gain <= 0.0) {
                    u_now[i] = a.vel_const;
                }
            } else if (a.role == AgentRole::Uncooperative) {
                u_now[i] = a.vel_const;
            }
        }

        auto velocity_of = [&](int i) -> Eigen::Vector2d {
            const Agent& a = world.agents[i];
            switch (a.kind) {
                case AgentKind::Unicycle:
                    return Eigen::Vector2d(
                        u_now[i](0) * std::cos(state[i](2)),
                        u_now[i](0) * std::sin(state[i](2)));
                case AgentKind::DoubleIntegrator:
                    return state[i].segment<2>(2);
                case AgentKind::SingleIntegrator:
                    return u_now[i];
            }
            return Eigen::Vector2d::Zero();
        };

        std::vector<AgentStepResult> results(egos.size());
        for (size_t e = 0; e < egos.size(); ++e) {
            std::vector<Observation> obs;
            for (int j = 0; j < na; ++j) {
                if (j == egos[e]) continue;
                obs.push_back({state[j].head<2>(), velocity_of(j)});
            }
            results[e] = decentralized_agent_step(world, egos[e],
                                                  state[egos[e]], obs,
                                                  chains[e], t);
        }

        std::vector<double> row;
        row.reserve(log.columns.size());
        row.push_back(t);
        for (int i = 0; i < na; ++i)
            for (int k = 0; k < state[i].size(); ++k) row.push_back(state[i](k));
        for (size_t e = 0; e < egos.size(); ++e)
            for (int j = 0; j < 2; ++j)
                row.push_back(results[e].ok ? results[e].u(j) : 0.0);
        bool boundary_hit = false;
        size_t bar_at = 0;
        for (size_t e = 0; e < egos.size(); ++e) {
            const int r = ego_degree(world.agents[egos[e]]);
            for (int p = 0; p < na - 1; ++p, ++bar_at) {
                const double h = results[e].h[p];
                log.min_h = std::min(log.min_h, h);
                log.per_barrier_min_h[bar_at] =
                    std::min(log.per_barrier_min_h[bar_at], h);
                if (h <= 0.0) boundary_hit = true;
                row.push_back(h);
                for (int k = 1; k <= r; ++k)
                    row.push_back(chains[e][p].nu(k));
                for (int k = 1; k <= r; ++k)
                    row.push_back(results[e].trust.empty()
                                      ? 0.0
                                      : results[e].trust[p][k - 1].rho);
            }
        }
        bool all_at_goal = true;
        for (size_t e = 0; e < egos.size(); ++e) {
            const double d =
                (world.agents[egos[e]].goal - state[egos[e]].head<2>()).norm();
            row.push_back(d);
            if (d > prm.goal_tol) all_at_goal = false;
        }
        log.rows.push_back(std::move(row));

        if (boundary_hit) {
            log.status = RunStatus::Failure;
            log.failure_reason = "barrier";
            log.t_fail = t;
            break;
        }
        bool qp_failed = false;
        for (const auto& r2 : results)
            if (!r2.ok) {
                log.failure_reason = r2.reason == FailureReason::Boundary
                                         ? "boundary"
                                         : "incompatible";
                qp_failed = true;
            }
        if (qp_failed) {
            log.status = RunStatus::Failure;
            log.t_fail = t;
            break;
        }
        if (all_at_goal) {
            reached = true;
            log.t_fail = t;
            break;
        }
        if (s == steps) break;

        for (size_t e = 0; e < egos.size(); ++e) {
            u_now[egos[e]] = results[e].u;
            chains[e] = results[e].chains;
        }
        for (int i = 0; i < na; ++i)
            state[i] = step_plant(systems[i], t, state[i], u_now[i], prm.dt);
        last_u = u_now;
    }
    if (log.status == RunStatus::Completed && !reached && !egos.empty()) {
        log.status = RunStatus::Failure;
        log.failure_reason = "goal";
        log.t_fail = prm.horizon;
    }
    return log;
}

}  // namespace rtcbf
