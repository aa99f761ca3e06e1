#include "rtcbf/scenarios.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace rtcbf {

namespace {

using nlohmann::json;

double num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument("config: " + key + " must be a number");
    return j.at(key).get<double>();
}

bool flag(const json& j, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean())
        throw std::invalid_argument("config: " + key + " must be a boolean");
    return j.at(key).get<bool>();
}

json section(const json& j, const std::string& key) {
    if (!j.contains(key)) return json::object();
    if (!j.at(key).is_object())
        throw std::invalid_argument("config: " + key + " must be an object");
    return j.at(key);
}

AdaptationConfig base_adapt(const json& config, double dt) {
    AdaptationConfig a;
    a.dt = dt;
    a.k_margin = num(config, "k_margin", 1.2);
    a.top_derivative_clamp = num(config, "top_derivative_clamp", 1e3);
    return a;
}

}  // namespace

void validate_config(const json& config) {
    if (!config.is_object())
        throw std::invalid_argument("config: document must be an object");
    if (!config.contains("scenario") || !config.at("scenario").is_string())
        throw std::invalid_argument("config: missing string field 'scenario'");
    static const std::set<std::string> kinds{
        "acc", "corridor_si", "corridor_di", "multiagent1", "multiagent2"};
    const std::string kind = config.at("scenario").get<std::string>();
    if (!kinds.count(kind))
        throw std::invalid_argument("config: unknown scenario '" + kind + "'");
    if (num(config, "dt", 0.01) <= 0.0)
        throw std::invalid_argument("config: dt must be > 0");
    if (num(config, "T", 1.0) <= 0.0)
        throw std::invalid_argument("config: T must be > 0");
    if (num(config, "k_margin", 1.2) < 1.0)
        throw std::invalid_argument("config: k_margin must be >= 1");
    flag(config, "adaptation", true);
    // Force type checks on the scenario sections that are present.
    section(config, "acc");
    section(config, "corridor");
    section(config, "multiagent");
}

SingleAgentScenario build_acc(const json& config) {
    const json p = section(config, "acc");
    const double M = num(p, "mass", 1650.0);
    const double f0 = num(p, "f0", 0.1);
    const double f1 = num(p, "f1", 5.0);
    const double f2 = num(p, "f2", 0.25);
    const double grav = num(p, "gravity", 9.81);
    const double c = num(p, "c", 0.4);
    const double d_bar = num(p, "d_bar", 10.0);
    const double v_d = num(p, "v_d", 24.0);
    const double v_min = num(p, "v_min", 0.0);
    const double v_max = num(p, "v_max", 30.0);

    SingleAgentScenario sc;
    sc.dt = num(config, "dt", 0.01);
    sc.horizon = num(config, "T", 50.0);
    sc.adaptation = flag(config, "adaptation", true);
    sc.adapt = base_adapt(config, sc.dt);
    // The cruise-control barriers ride their boundary for long stretches;
    // any margin gain above 1 compounds there, so this scenario defaults to
    // the conservative setting.
    sc.adapt.k_margin = num(config, "k_margin", 1.0);

    auto resistance = [=](double v) {
        return f0 * (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0)) + f1 * v +
               f2 * v * v;
    };

    ControlAffineSystem sys;
    sys.state_dim = 3;  // (v, v_L, D)
    sys.input_dim = 1;
    sys.drift = [=](double t, const Eigen::VectorXd& x) {
        Eigen::VectorXd f(3);
        f << -resistance(x(0)) / M, leader_accel(t), x(1) - x(0);
        return f;
    };
    sys.input_map = [=](double, const Eigen::VectorXd&) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 1);
        g(0, 0) = 1.0 / M;
        return g;
    };
    const double u_cap = c * M * grav;
    set_box_input(sys, Eigen::VectorXd::Constant(1, -u_cap),
                  Eigen::VectorXd::Constant(1, u_cap));
    sc.problem.system = sys;
    sc.problem.input_cost_weight = 1.0 / (M * M);
    sc.problem.reference = [](double, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };

    BarrierSpec distance;
    distance.relative_degree = 2;
    distance.oracle = [=](double t, const Eigen::VectorXd& x) {
        BarrierSample s;
        s.h_derivs.resize(2);
        s.h_derivs << x(2) - d_bar, x(1) - x(0);
        s.a = leader_accel(t) + resistance(x(0)) / M;
        s.B = Eigen::RowVectorXd::Constant(1, -1.0 / M);
        return s;
    };
    BarrierSpec speed_lo;
    speed_lo.relative_degree = 1;
    speed_lo.oracle = [=](double, const Eigen::VectorXd& x) {
        BarrierSample s;
        s.h_derivs = Eigen::VectorXd::Constant(1, x(0) - v_min);
        s.a = -resistance(x(0)) / M;
        s.B = Eigen::RowVectorXd::Constant(1, 1.0 / M);
        return s;
    };
    BarrierSpec speed_hi;
    speed_hi.relative_degree = 1;
    speed_hi.oracle = [=](double, const Eigen::VectorXd& x) {
        BarrierSample s;
        s.h_derivs = Eigen::VectorXd::Constant(1, v_max - x(0));
        s.a = resistance(x(0)) / M;
        s.B = Eigen::RowVectorXd::Constant(1, -1.0 / M);
        return s;
    };
    sc.problem.barriers = {distance, speed_lo, speed_hi};

    LyapunovSpec clf;
    clf.rate = num(p, "clf_rate", 10.0);
    clf.slack_weight = num(p, "slack_weight", 10.0);
    clf.oracle = [=](double, const Eigen::VectorXd& x) {
        LyapunovSample s;
        s.V = (x(0) - v_d) * (x(0) - v_d);
        s.p = 2.0 * (x(0) - v_d) * (-resistance(x(0)) / M);
        s.Q = Eigen::RowVectorXd::Constant(1, 2.0 * (x(0) - v_d) / M);
        return s;
    };
    sc.problem.lyapunov = clf;

    const double nu11 = num(p, "nu11", 0.5);
    const double nu12 = num(p, "nu12", 0.7);
    const double nu2 = num(p, "nu2", 0.5);
    const double nu3 = num(p, "nu3", 0.5);
    sc.chains = {ClassKChain(2, {nu11, nu12}), ClassKChain(1, {nu2}),
                 ClassKChain(1, {nu3})};
    sc.adapt.nu_desired = {
        {constant_policy(nu11),
         steering_policy(num(p, "nu12_nominal", nu12),
                         num(p, "steering_gain", 1.0),
                         num(p, "steering_sat", 1.0), sc.dt)},
        {constant_policy(nu2)},
        {constant_policy(nu3)}};

    sc.x0.resize(3);
    sc.x0 << num(p, "v0", 20.0), num(p, "vl0", 10.0), num(p, "d0", 100.0);
    sc.state_names = {"v", "v_lead", "gap"};
    sc.barrier_names = {"gap", "vmin", "vmax"};
    return sc;
}

SingleAgentScenario build_corridor(const json& config, bool second_order) {
    const json p = section(config, "corridor");
    const double d_min = num(p, "d_min", 0.1);
    const double goal = num(p, "goal", 6.0);
    const double k_x = num(p, "k_x", 1.0);
    const double k_v = num(p, "k_v", 2.0);
    const double u_max = num(p, "u_max", second_order ? 20.0 : 5.0);
    const double lo0 = num(p, "lower0", -2.1);
    const double lo1 = num(p, "lower1", 0.5);
    const double hi0 = num(p, "upper0", 3.2);
    const double hi1 = num(p, "upper1", 1.5);
    const double tc = num(p, "t_converge", 3.0);
    if (tc <= 0.0)
        throw std::invalid_argument("config: t_converge must be > 0");

    SingleAgentScenario sc;
    sc.dt = num(config, "dt", 0.01);
    sc.horizon = num(config, "T", 5.5);
    sc.adaptation = flag(config, "adaptation", true);
    sc.adapt = base_adapt(config, sc.dt);
    // Near-wall recoveries need slope jumps of order 1/h within one sample;
    // the stock clamp would smear them over many steps and lose the race.
    sc.adapt.top_derivative_clamp = num(config, "top_derivative_clamp", 1e8);

    auto wall = [tc](double y0, double y1, double t) {
        const double s = std::min(t, tc) / tc;
        return y0 + (y1 - y0) * s;
    };
    auto wall_rate = [tc](double y0, double y1, double t) {
        return t < tc ? (y1 - y0) / tc : 0.0;
    };

    ControlAffineSystem sys;
    if (second_order) {
        sys.state_dim = 2;
        sys.input_dim = 1;
        sys.drift = [](double, const Eigen::VectorXd& x) {
            Eigen::VectorXd f(2);
            f << x(1), 0.0;
            return f;
        };
        sys.input_map = [](double, const Eigen::VectorXd&) {
            Eigen::MatrixXd g(2, 1);
            g << 0.0, 1.0;
            return g;
        };
    } else {
        sys = make_single_integrator(u_max);
    }
    set_box_input(sys, Eigen::VectorXd::Constant(1, -u_max),
                  Eigen::VectorXd::Constant(1, u_max));
    sc.problem.system = sys;
    if (second_order) {
        sc.problem.reference = [=](double, const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(
                       1, -k_v * (x(1) + k_x * (x(0) - goal)))
                .eval();
        };
    } else {
        sc.problem.reference = [=](double, const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, -k_x * (x(0) - goal)).eval();
        };
    }

    auto make_barrier = [&](double y0, double y1) {
        BarrierSpec b;
        if (second_order) {
            b.relative_degree = 2;
            b.oracle = [=](double t, const Eigen::VectorXd& x) {
                const double y = wall(y0, y1, t), yd = wall_rate(y0, y1, t);
                const double d = x(0) - y, vrel = x(1) - yd;
                BarrierSample s;
                s.h_derivs.resize(2);
                s.h_derivs << d * d - d_min * d_min, 2.0 * d * vrel;
                s.a = 2.0 * vrel * vrel;
                s.B = Eigen::RowVectorXd::Constant(1, 2.0 * d);
                return s;
            };
        } else {
            b.relative_degree = 1;
            b.oracle = [=](double t, const Eigen::VectorXd& x) {
                const double y = wall(y0, y1, t), yd = wall_rate(y0, y1, t);
                const double d = x(0) - y;
                BarrierSample s;
                s.h_derivs = Eigen::VectorXd::Constant(1, d * d - d_min * d_min);
                s.a = -2.0 * d * yd;
                s.B = Eigen::RowVectorXd::Constant(1, 2.0 * d);
                return s;
            };
        }
        return b;
    };
    sc.problem.barriers = {make_barrier(lo0, lo1), make_barrier(hi0, hi1)};

    LyapunovSpec clf;
    clf.rate = num(p, "clf_rate", 1.0);
    clf.slack_weight = num(p, "slack_weight", 100.0);
    if (second_order) {
        clf.oracle = [=](double, const Eigen::VectorXd& x) {
            const double s2 = x(1) + k_x * (x(0) - goal);
            LyapunovSample s;
            s.V = s2 * s2;
            s.p = 2.0 * s2 * k_x * x(1);
            s.Q = Eigen::RowVectorXd::Constant(1, 2.0 * s2);
            return s;
        };
    } else {
        clf.oracle = [=](double, const Eigen::VectorXd& x) {
            LyapunovSample s;
            s.V = (x(0) - goal) * (x(0) - goal);
            s.p = 0.0;
            s.Q = Eigen::RowVectorXd::Constant(1, 2.0 * (x(0) - goal));
            return s;
        };
    }
    sc.problem.lyapunov = clf;

    // With both walls still closing, slopes below ~1 leave the two rows in
    // conflict from the start for a second-order plant at rest.
    const double nu1 = num(p, "nu1", second_order ? 1.0 : 0.8);
    const double nu2 = num(p, "nu2", second_order ? 1.0 : 0.8);
    if (second_order) {
        sc.chains = {ClassKChain(2, {nu1, nu2}), ClassKChain(2, {nu1, nu2})};
        sc.adapt.nu_desired = {{constant_policy(nu1), constant_policy(nu2)},
                               {constant_policy(nu1), constant_policy(nu2)}};
    } else {
        sc.chains = {ClassKChain(1, {nu1}), ClassKChain(1, {nu2})};
        sc.adapt.nu_desired = {{constant_policy(nu1)},
                               {constant_policy(nu2)}};
    }

    if (second_order) {
        sc.x0.resize(2);
        sc.x0 << num(p, "x0", -1.0), num(p, "v0", 0.0);
        sc.state_names = {"x", "xdot"};
    } else {
        sc.x0 = Eigen::VectorXd::Constant(1, num(p, "x0", -1.0));
        sc.state_names = {"x"};
    }
    sc.barrier_names = {"lower", "upper"};
    return sc;
}

MultiAgentWorld build_multiagent(const json& config, int which) {
    const json p = section(config, "multiagent");
    MultiAgentWorld w;
    MultiAgentParams& prm = w.params;
    prm.dt = num(config, "dt", 0.01);
    prm.horizon = num(config, "T", which == 1 ? 12.0 : 16.0);
    prm.adaptation = flag(config, "adaptation", true);
    prm.d_min = num(p, "d_min", 0.5);
    prm.beta = num(p, "beta", 1.0);
    prm.rho_m_bar = num(p, "rho_m_bar", 0.2);
    prm.trust_gain = num(p, "trust_gain", 0.5);
    prm.delta_f = num(p, "delta_f", 0.5);
    prm.k_margin = num(config, "k_margin", 1.2);
    // Second-order pairs occasionally need a one-sample slope jump of order
    // 1/dt^2; the stock clamp would smear it over many steps.
    prm.top_derivative_clamp = num(config, "top_derivative_clamp", 1e5);
    prm.goal_tol = num(p, "goal_tol", 0.5);
    prm.nu_init_r1 = num(p, "nu_init_r1", 0.8);
    prm.nu_init = {num(p, "nu_init1", which == 1 ? 0.8 : 0.4),
                   num(p, "nu_init2", 0.8)};

    auto unicycle = [&](const std::string& name, double px, double py,
                        double th, double gx, double gy) {
        Agent a;
        a.name = name;
        a.role = AgentRole::Ego;
        a.kind = AgentKind::Unicycle;
        a.state = (Eigen::VectorXd(3) << px, py, th).finished();
        a.goal = Eigen::Vector2d(gx, gy);
        a.u_lo = (Eigen::VectorXd(2) << -1.0, -2.0).finished();
        a.u_hi = (Eigen::VectorXd(2) << 2.0, 2.0).finished();
        a.sigma = num(p, "sigma", 1.0);
        return a;
    };
    auto double_int = [&](const std::string& name, double px, double py,
                          double gx, double gy) {
        Agent a;
        a.name = name;
        a.role = AgentRole::Ego;
        a.kind = AgentKind::DoubleIntegrator;
        a.state = (Eigen::VectorXd(4) << px, py, 0.0, 0.0).finished();
        a.goal = Eigen::Vector2d(gx, gy);
        a.u_lo = Eigen::VectorXd::Constant(2, -3.0);
        a.u_hi = Eigen::VectorXd::Constant(2, 3.0);
        return a;
    };
    auto scripted = [&](const std::string& name, AgentRole role, double px,
                        double py) {
        Agent a;
        a.name = name;
        a.role = role;
        a.kind = AgentKind::SingleIntegrator;
        a.state = (Eigen::VectorXd(2) << px, py).finished();
        a.u_lo = Eigen::VectorXd::Constant(2, -10.0);
        a.u_hi = Eigen::VectorXd::Constant(2, 10.0);
        return a;
    };

    if (which == 1) {
        w.agents.push_back(unicycle("e1", 0.0, -4.0, M_PI / 2, 0.0, 4.0));
        w.agents.push_back(unicycle("e2", -2.0, 4.0, -M_PI / 2, -2.0, -4.0));
        w.agents.push_back(unicycle("e3", 2.0, 4.0, -M_PI / 2, 2.0, -4.0));
        Agent adv = scripted("adv", AgentRole::Adversarial, 0.5, 3.0);
        adv.target = 0;
        // With chase_gain 0 the adversary runs a straight strike through the
        // point (adv_aim_x, adv_aim_y) at speed adv_speed.
        adv.chase_gain = num(p, "chase_gain", 0.0);
        adv.speed_cap = num(p, "chase_cap", 1.2);
        adv.chase_until = num(p, "chase_until", 1e30);
        {
            const Eigen::Vector2d aim(num(p, "adv_aim_x", 0.0),
                                      num(p, "adv_aim_y", 1.0));
            Eigen::Vector2d dir = aim - adv.state.head<2>();
            if (dir.norm() > 1e-12) dir.normalize();
            adv.vel_const = num(p, "adv_speed", 2.2) * dir;
        }
        w.agents.push_back(adv);
        Agent unc = scripted("unc", AgentRole::Uncooperative, 5.0, 0.5);
        unc.vel_const = Eigen::Vector2d(num(p, "unc_vx", -1.0), 0.0);
        w.agents.push_back(unc);
        const Eigen::Vector2d up(0, 1), down(0, -1), left(-1, 0), right(1, 0);
        const std::vector<Eigen::Vector2d> nominal{up, down, down, right,
                                                   left};
        for (int e = 0; e < 3; ++e)
            for (int j = 0; j < 5; ++j)
                if (j != e) w.beliefs[{e, j}] = nominal[j];
    } else {
        w.agents.push_back(unicycle("e1", 0.0, -4.0, M_PI / 2, 0.0, 4.0));
        w.agents.push_back(unicycle("e2", -1.5, 4.0, -M_PI / 2, -1.5, -4.0));
        w.agents.push_back(double_int("e3", -4.0, 0.5, 4.0, 0.5));
        w.agents.push_back(double_int("e4", 4.0, -0.5, -4.0, -0.5));
        Agent adv = scripted("adv", AgentRole::Adversarial, 0.5, 3.0);
        adv.target = 0;
        adv.chase_gain = num(p, "chase_gain", 0.0);
        adv.speed_cap = num(p, "chase_cap", 1.2);
        adv.chase_until = num(p, "chase_until", 1e30);
        {
            const Eigen::Vector2d aim(num(p, "adv_aim_x", 0.0),
                                      num(p, "adv_aim_y", 2.0));
            Eigen::Vector2d dir = aim - adv.state.head<2>();
            if (dir.norm() > 1e-12) dir.normalize();
            adv.vel_const = num(p, "adv_speed", 2.6) * dir;
        }
        w.agents.push_back(adv);
        Agent unc = scripted("unc", AgentRole::Uncooperative, 5.0, 1.5);
        unc.vel_const = Eigen::Vector2d(num(p, "unc_vx", -1.0), 0.0);
        w.agents.push_back(unc);
        const Eigen::Vector2d up(0, 1), down(0, -1), left(-1, 0), right(1, 0);
        const std::vector<Eigen::Vector2d> nominal{up, down, right, left,
                                                   right, left};
        for (int e = 0; e < 4; ++e)
            for (int j = 0; j < 6; ++j)
                if (j != e) w.beliefs[{e, j}] = nominal[j];
    }
    return w;
}

SimLog run_scenario(const json& config) {
    validate_config(config);
    const std::string kind = config.at("scenario").get<std::string>();
    if (kind == "acc") return run_single_agent(build_acc(config));
    if (kind == "corridor_si")
        return run_single_agent(build_corridor(config, false));
    if (kind == "corridor_di")
        return run_single_agent(build_corridor(config, true));
    if (kind == "multiagent1")
        return run_multi_agent(build_multiagent(config, 1));
    return run_multi_agent(build_multiagent(config, 2));
}

}  // namespace rtcbf
