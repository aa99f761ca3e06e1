#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rtcbf {

// min c'z  s.t.  G z <= w,  lo <= z <= hi (bounds optional, +-inf allowed).
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
    Eigen::VectorXd w;
    Eigen::VectorXd lo;  // size 0 => unbounded below
    Eigen::VectorXd hi;  // size 0 => unbounded above

    int num_vars() const { return static_cast<int>(c.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd z;          // optimal point when status == Optimal
    double objective = 0.0;
    // Farkas certificate when infeasible: lambda >= 0, lambda'G = 0,
    // lambda'w < 0 (over the row system including bound rows).
    Eigen::VectorXd certificate;
};

LpResult solve_lp(const LinearProgram& lp);

}  // namespace rtcbf
