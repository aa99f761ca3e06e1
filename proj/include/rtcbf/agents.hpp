#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "rtcbf/adapt.hpp"
#include "rtcbf/sim.hpp"
#include "rtcbf/trust.hpp"

namespace rtcbf {

enum class AgentRole { Ego, Adversarial, Uncooperative };
enum class AgentKind { Unicycle, DoubleIntegrator, SingleIntegrator };

// One agent in a multi-agent world. Ego agents run the pairwise-barrier QP
// and never read other agents' roles; scripted agents follow their policy
// fields. Unicycle state is (px, py, theta) with input (v, omega) and a
// look-ahead output point offset by `lookahead` along the heading.
struct Agent {
    std::string name;
    AgentRole role = AgentRole::Ego;
    AgentKind kind = AgentKind::SingleIntegrator;
    Eigen::VectorXd state;
    Eigen::VectorXd u_lo, u_hi;

    Eigen::Vector2d goal = Eigen::Vector2d::Zero();  // ego
    int target = -1;              // adversarial: index of the chased agent
    double chase_gain = 0.8;      // adversarial proportional gain
    double speed_cap = 1.2;       // adversarial saturation
    double chase_until = 1e30;    // adversarial: holds last velocity afterwards
    Eigen::Vector2d vel_const = Eigen::Vector2d::Zero();  // uncooperative

    double lookahead = 0.3;
    double sigma = 1.0;  // heading-term weight of the unicycle pair barrier
    // ego reference gains: unicycle (k_v, k_w), double integrator (k_p, k_d)
    double k_v = 0.8, k_w = 2.0, k_p = 1.0, k_d = 1.6;
};

struct MultiAgentParams {
    double d_min = 0.5;
    double beta = 1.0;
    double rho_m_bar = 0.2;
    double trust_gain = 0.5;   // per order
    double delta_f = 0.5;      // neighbor-velocity change bound per sample
    double k_margin = 1.2;
    double top_derivative_clamp = 1e3;
    double goal_tol = 0.5;
    bool adaptation = true;
    double dt = 0.01;
    double horizon = 10.0;
    // per-order initial slopes for second-order ego pairs
    std::vector<double> nu_init{0.8, 0.8};
    // initial slope for first-order ego pairs
    double nu_init_r1 = 0.8;
};

struct MultiAgentWorld {
    std::vector<Agent> agents;
    MultiAgentParams params;
    // beliefs[(ego idx, neighbor idx)] = believed motion direction (unit);
    // missing entries fall back to the worst case (x_i - x_j) direction.
    std::map<std::pair<int, int>, Eigen::Vector2d> beliefs;
};

// Snapshot observation of one neighbor (Assumption-2 style: state and its
// derivative, here position and velocity of the collision point).
struct Observation {
    Eigen::Vector2d pos;
    Eigen::Vector2d vel;
};

struct AgentStepResult {
    bool ok = false;
    FailureReason reason = FailureReason::None;
    Eigen::VectorXd u;
    std::vector<ClassKChain> chains;          // one per neighbor pair
    std::vector<double> h;                    // pairwise h at the sample
    std::vector<std::vector<TrustState>> trust;  // [pair][order]
};

// One decentralized sampled-data step for ego `idx`: pairwise QP, trust
// scores per pair and order, robust projection of the desired rates through
// the pointwise bounds, chain advance. `chains` holds one chain per
// neighbor (world order, ego itself skipped).
AgentStepResult decentralized_agent_step(
    const MultiAgentWorld& world, int idx, const Eigen::VectorXd& ego_state,
    const std::vector<Observation>& observations,
    const std::vector<ClassKChain>& chains, double t);

// Full sampled-data world run; ends early with Completed once every ego is
// within goal_tol of its goal, fails on QP infeasibility, a boundary event,
// any pairwise h <= 0, or egos not at goal by the horizon.
SimLog run_multi_agent(const MultiAgentWorld& world);

}  // namespace rtcbf
