#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rtcbf/adapt.hpp"

namespace rtcbf {

// ACC leader deceleration law: ramps in over the first 10 s, then coasts.
double leader_accel(double t);

enum class RunStatus { Completed, Failure };

struct SimLog {
    std::vector<std::string> columns;       // first column is always t
    std::vector<std::vector<double>> rows;  // one per sample
    RunStatus status = RunStatus::Completed;
    std::string failure_reason;             // empty when completed
    double t_fail = 0.0;                    // horizon T when completed
    double min_h = 0.0;
    std::vector<std::string> barrier_names;
    std::vector<double> per_barrier_min_h;
};

// CSV with 9 significant digits, fixed column order; byte-stable across runs.
void write_csv(const SimLog& log, const std::string& path);
std::string summary_json(const SimLog& log);

struct SingleAgentScenario {
    ControlProblem problem;
    std::vector<ClassKChain> chains;
    Eigen::VectorXd x0;
    double dt = 0.01;
    double horizon = 1.0;
    bool adaptation = true;
    AdaptationConfig adapt;
    std::vector<std::string> state_names;
    std::vector<std::string> barrier_names;
};

// Sampled-data loop: control at each dt (zero-order hold), RK4 in between.
// Terminates on QP infeasibility, a boundary event, or any h_i <= 0.
SimLog run_single_agent(const SingleAgentScenario& scenario);

}  // namespace rtcbf
