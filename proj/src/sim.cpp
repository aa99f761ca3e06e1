#include "rtcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <stdexcept>

namespace rtcbf {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

double leader_accel(double t) {
    if (t >= 10.0) return 0.0;
    return -0.6 * (1.0 - std::tanh(1.0 / (2.0 * (10.0 - t))));
}

void write_csv(const SimLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (size_t i = 0; i < log.columns.size(); ++i) {
        if (i) out << ',';
        out << log.columns[i];
    }
    out << '\n';
    for (const auto& row : log.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << fmt9(row[i]);
        }
        out << '\n';
    }
}

std::string summary_json(const SimLog& log) {
    std::string s = "{\n";
    s += "  \"status\": \"";
    s += (log.status == RunStatus::Completed ? "completed" : "failure");
    s += "\",\n";
    s += "  \"failure_reason\": \"" + log.failure_reason + "\",\n";
    s += "  \"t_fail\": " + fmt9(log.t_fail) + ",\n";
    s += "  \"min_h\": " + fmt9(log.min_h) + ",\n";
    s += "  \"barrier_min_h\": {";
    for (size_t i = 0; i < log.barrier_names.size(); ++i) {
        if (i) s += ", ";
        s += "\"" + log.barrier_names[i] +
             "\": " + fmt9(log.per_barrier_min_h[i]);
    }
    s += "}\n}\n";
    return s;
}

SimLog run_single_agent(const SingleAgentScenario& scenario) {
    const ControlProblem& pb = scenario.problem;
    const int m = pb.system.input_dim;
    const int n_bar = static_cast<int>(pb.barriers.size());
    const bool has_clf = pb.lyapunov.has_value();

    SimLog log;
    log.barrier_names.resize(n_bar);
    for (int i = 0; i < n_bar; ++i)
        log.barrier_names[i] =
            i < static_cast<int>(scenario.barrier_names.size())
                ? scenario.barrier_names[i]
                : "b" + std::to_string(i + 1);
    log.per_barrier_min_h.assign(n_bar,
                                 std::numeric_limits<double>::infinity());

    log.columns.push_back("t");
    for (int i = 0; i < pb.system.state_dim; ++i)
        log.columns.push_back(i < static_cast<int>(scenario.state_names.size())
                                  ? scenario.state_names[i]
                                  : "x" + std::to_string(i));
    for (int j = 0; j < m; ++j) log.columns.push_back("u" + std::to_string(j));
    if (has_clf) log.columns.push_back("delta");
    for (int i = 0; i < n_bar; ++i) {
        const int r = pb.barriers[i].relative_degree;
        log.columns.push_back("h_" + log.barrier_names[i]);
        for (int k = 1; k < r; ++k)
            log.columns.push_back("psi" + std::to_string(k) + "_" +
                                  log.barrier_names[i]);
        for (int k = 1; k <= r; ++k)
            log.columns.push_back("nu" + std::to_string(k) + "_" +
                                  log.barrier_names[i]);
    }

    Eigen::VectorXd x = scenario.x0;
    std::vector<ClassKChain> chains = scenario.chains;
    const long steps = std::lround(scenario.horizon / scenario.dt);
    log.min_h = std::numeric_limits<double>::infinity();
    log.status = RunStatus::Completed;
    log.t_fail = scenario.horizon;

    for (long s = 0; s <= steps; ++s) {
        const double t = s * scenario.dt;
        const StepResult res =
            scenario.adaptation
                ? rtcbf_step(pb, chains, t, x, scenario.adapt)
                : controller_qp(pb, chains, t, x);

        std::vector<double> row;
        row.reserve(log.columns.size());
        row.push_back(t);
        for (int i = 0; i < pb.system.state_dim; ++i) row.push_back(x(i));
        for (int j = 0; j < m; ++j)
            row.push_back(res.ok ? res.u(j) : 0.0);
        if (has_clf) row.push_back(res.delta);
        bool boundary_hit = false;
        for (int i = 0; i < n_bar; ++i) {
            const int r = pb.barriers[i].relative_degree;
            const double h = res.stacks[i].psi(0);
            log.min_h = std::min(log.min_h, h);
            log.per_barrier_min_h[i] = std::min(log.per_barrier_min_h[i], h);
            if (h <= 0.0) boundary_hit = true;
            row.push_back(h);
            for (int k = 1; k < r; ++k) row.push_back(res.stacks[i].psi(k));
            for (int k = 1; k <= r; ++k) row.push_back(chains[i].nu(k));
        }
        log.rows.push_back(std::move(row));

        if (boundary_hit) {
            log.status = RunStatus::Failure;
            log.failure_reason = "barrier";
            log.t_fail = t;
            break;
        }
        if (!res.ok) {
            log.status = RunStatus::Failure;
            log.failure_reason =
                res.reason == FailureReason::Boundary ? "boundary"
                                                      : "incompatible";
            log.t_fail = t;
            break;
        }
        if (s == steps) break;
        x = step_plant(pb.system, t, x, res.u, scenario.dt);
        chains = res.chains;
    }
    return log;
}

}  // namespace rtcbf
