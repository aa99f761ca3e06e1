// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are property-based plus ordinal scenario reproduction.
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rtcbf/agents.hpp"
#include "rtcbf/analytic.hpp"
#include "rtcbf/hocbf.hpp"
#include "rtcbf/qp.hpp"
#include "rtcbf/scenarios.hpp"
#include "rtcbf/sim.hpp"
#include "rtcbf/trust.hpp"

using namespace rtcbf;
using nlohmann::json;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", idx, name.c_str(),
                ok ? "PASS" : "FAIL", detail.empty() ? "" : " -- ",
                detail.c_str());
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

int column_index(const SimLog& log, const std::string& name) {
    for (size_t i = 0; i < log.columns.size(); ++i)
        if (log.columns[i] == name) return static_cast<int>(i);
    return -1;
}

// Logs of completed runs must never dip below -1e-9 on any h column; failed
// runs may violate only at their final (failing) sample.
std::vector<SimLog> audit_logs;

bool audit(const SimLog& log) {
    const size_t last =
        log.status == RunStatus::Failure && !log.rows.empty()
            ? log.rows.size() - 1
            : log.rows.size();
    for (size_t r = 0; r < last; ++r)
        for (size_t c = 0; c < log.columns.size(); ++c)
            if (log.columns[c].rfind("h_", 0) == 0 &&
                log.rows[r][c] < -1e-9)
                return false;
    return true;
}

SimLog run_and_audit(const json& cfg) {
    SimLog log = run_scenario(cfg);
    audit_logs.push_back(log);
    return log;
}

std::string csv_string(const SimLog& log) {
    const std::string path = "/tmp/rtcbf_accept.csv";
    write_csv(log, path);
    std::FILE* f = std::fopen(path.c_str(), "rb");
    std::string out;
    char buf[65536];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
    std::fclose(f);
    std::remove(path.c_str());
    return out;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 3);
        Eigen::VectorXd ur(m);
        Eigen::RowVectorXd lg(m);
        for (int j = 0; j < m; ++j) {
            ur(j) = normal(rng);
            lg(j) = normal(rng);
        }
        const double dh_dt = normal(rng), lf = normal(rng),
                     alpha = normal(rng);
        if (lg.norm() < 1e-9 &&
            dh_dt + lf + lg.dot(ur) + alpha < 0)
            continue;
        const AnalyticResult a =
            analytic_cbf_qp(ur, dh_dt, lf, lg, alpha, AnalyticVariant::Kkt);
        QuadraticProgram qp;
        qp.H = 2.0 * Eigen::MatrixXd::Identity(m, m);
        qp.q = -2.0 * ur;
        qp.G = -lg;
        qp.w = Eigen::VectorXd::Constant(1, dh_dt + lf + alpha);
        const QpResult b = solve_qp(qp);
        if (b.status != QpStatus::Optimal) {
            ok = false;
            break;
        }
        worst = std::max(worst, (a.u - b.z).norm());
        if (worst > 1e-6) ok = false;
    }
    const double el = seconds_since(t0);
    std::ostringstream d;
    d << "max |du| = " << worst << ", " << el << " s";
    report(1, "oracle equivalence", ok && el <= 5.0, d.str());
}

void criterion2() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double dt = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int r = 2 + static_cast<int>(rng() % 2);
        const double offset = 3.0 + 2.0 * uni(rng);
        // The check compares a first-order finite difference against the
        // exact derivative, so keep the signal curvature well inside the
        // O(dt) tolerance budget.
        const double w = 0.3 + 0.7 * uni(rng);
        BarrierSpec spec;
        spec.relative_degree = r;
        spec.oracle = [=](double t, const Eigen::VectorXd&) {
            auto deriv = [=](int j) {
                const double p = std::pow(w, j);
                switch (j % 4) {
                    case 0: return p * std::sin(w * t);
                    case 1: return p * std::cos(w * t);
                    case 2: return -p * std::sin(w * t);
                    default: return -p * std::cos(w * t);
                }
            };
            BarrierSample s;
            s.h_derivs.resize(r);
            s.h_derivs(0) = offset + deriv(0);
            for (int j = 1; j < r; ++j) s.h_derivs(j) = deriv(j);
            s.a = deriv(r);
            s.B = Eigen::RowVectorXd::Zero(1);
            return s;
        };
        std::vector<double> nu;
        for (int k = 0; k < r; ++k) nu.push_back(0.2 + uni(rng));
        const ClassKChain chain(r, nu);
        const double t = 5.0 * uni(rng);
        const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
        const auto now = derived_barriers(spec, chain, t, x);
        const auto nxt = derived_barriers(spec, chain, t + dt, x);
        for (int k = 1; k < r; ++k) {
            const double fd = (nxt.psi(k - 1) - now.psi(k - 1)) / dt;
            worst = std::max(worst, std::abs(fd - (now.psi(k) -
                                                   chain.nu(k) *
                                                       now.psi(k - 1))));
        }
        const double fd_top = (nxt.psi(r - 1) - now.psi(r - 1)) / dt;
        worst = std::max(worst, std::abs(fd_top - now.a_psi));
    }
    std::ostringstream d;
    d << "max error = " << worst << " (tol " << 10.0 * dt << ")";
    report(2, "derived-barrier self-consistency", worst <= 10.0 * dt, d.str());
}

void criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    json cfg{{"scenario", "acc"}, {"T", 50.0}};
    cfg["adaptation"] = false;
    const SimLog fixed = run_and_audit(cfg);
    cfg["adaptation"] = true;
    const SimLog rt = run_and_audit(cfg);
    const double el = seconds_since(t0);

    bool ok = true;
    std::ostringstream d;
    if (!(fixed.status == RunStatus::Failure && fixed.t_fail < 50.0)) {
        ok = false;
        d << "fixed run did not fail; ";
    }
    if (rt.status != RunStatus::Completed) {
        ok = false;
        d << "adaptive run did not complete (" << rt.failure_reason << " at "
          << rt.t_fail << "); ";
    }
    const int hcol = column_index(rt, "h_gap");
    const int nucol = column_index(rt, "nu2_gap");
    double min_h = 1e30, nu_end = 0.0;
    for (const auto& row : rt.rows) min_h = std::min(min_h, row[hcol]);
    if (!rt.rows.empty()) nu_end = rt.rows.back()[nucol];
    if (min_h < 0.0) {
        ok = false;
        d << "min h1 = " << min_h << "; ";
    }
    if (std::abs(nu_end - 0.7) > 0.05) {
        ok = false;
        d << "terminal nu = " << nu_end << "; ";
    }
    if (el > 10.0) {
        ok = false;
        d << "runtime " << el << " s; ";
    }
    d << "t_fail(fixed) = " << fixed.t_fail << ", min h1 = " << min_h
      << ", terminal nu = " << nu_end << ", " << el << " s";
    report(3, "acc reproduction", ok, d.str());
}

void criterion4() {
    const auto t0 = std::chrono::steady_clock::now();
    const double a = -1.95, b = 3.0, step = 0.05;
    const int count = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> t_fixed(count), t_rt(count);
    std::vector<SimLog> logs(2 * count);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            json cfg{{"scenario", "corridor_di"}, {"T", 5.5}};
            cfg["corridor"]["x0"] = a + i * step;
            cfg["adaptation"] = false;
            logs[2 * i] = run_scenario(cfg);
            t_fixed[i] = logs[2 * i].t_fail;
            cfg["adaptation"] = true;
            logs[2 * i + 1] = run_scenario(cfg);
            t_rt[i] = logs[2 * i + 1].t_fail;
        }
    };
    const int jobs =
        std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& l : logs) audit_logs.push_back(l);

    bool dominated = true, strict = false;
    double worst_gap = 0.0;
    for (int i = 0; i < count; ++i) {
        if (t_rt[i] < t_fixed[i] - 1e-9) {
            dominated = false;
            worst_gap = std::max(worst_gap, t_fixed[i] - t_rt[i]);
        }
        if (t_rt[i] > t_fixed[i] + 1e-9) strict = true;
    }
    const double el = seconds_since(t0);
    std::ostringstream d;
    d << count << " points, " << el << " s";
    if (!dominated) d << ", worst regression " << worst_gap << " s";
    report(4, "corridor dominance", dominated && strict && el <= 60.0,
           d.str());
}

void criterion5() {
    std::mt19937_64 rng(505);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.1, std::pow(2.0, 0.25));
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 3);
        Eigen::VectorXd ur(m), ud(m);
        Eigen::RowVectorXd lg(m);
        for (int j = 0; j < m; ++j) {
            ur(j) = normal(rng);
            ud(j) = normal(rng);
            lg(j) = normal(rng);
        }
        if (lg.norm() < 1e-12) continue;
        lg *= mag(rng) / lg.norm();
        const double dh_dt = normal(rng), lf = normal(rng);
        const double astar = shape_alpha(ur, ud, dh_dt, lf, lg);
        const auto dist = [&](double alpha) {
            return (analytic_cbf_qp(ur, dh_dt, lf, lg, alpha,
                                    AnalyticVariant::Scaled)
                        .u -
                    ud)
                .norm();
        };
        const double at_star = dist(astar);
        const double span = 10.0 * std::max(1.0, std::abs(astar));
        bool bad = false;
        for (int g = 0; g <= 10000; ++g) {
            const double alpha = astar - span + 2.0 * span * g / 10000.0;
            if (dist(alpha) < at_star - 1e-9) {
                bad = true;
                break;
            }
        }
        if (bad) ++violations;
    }
    std::ostringstream d;
    d << violations << " violations / 1000 instances";
    report(5, "shaped-alpha grid optimality", violations == 0, d.str());
}

void criterion6() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool ok = true;
    for (int trial = 0; trial < 1000000; ++trial) {
        TrustState s;
        s.margin = 30.0 * uni(rng);
        const double th1 = 2.0 * M_PI * uni(rng);
        const double th2 = 2.0 * M_PI * uni(rng);
        const double th3 = 2.0 * M_PI * uni(rng);
        trust_scores(s,
                     Eigen::Vector2d(std::cos(th1), std::sin(th1)),
                     Eigen::Vector2d(std::cos(th2), std::sin(th2)),
                     Eigen::Vector2d(std::cos(th3), std::sin(th3)),
                     0.1 + 4.0 * uni(rng), 0.02 + 0.95 * uni(rng));
        if (s.rho < -1.0 || s.rho > 1.0) {
            ok = false;
            break;
        }
    }
    // both branch expressions vanish exactly at the threshold
    for (double bar : {0.1, 0.2, 0.5, 0.9})
        for (double rg : {0.0, 0.25, 0.77, 1.0}) {
            if (combine_trust(bar, rg, bar) != 0.0) ok = false;
            if ((bar - bar) * (1.0 - rg) != 0.0) ok = false;
        }
    report(6, "trust bounds and threshold continuity", ok, "");
}

void criterion7() {
    const auto t0 = std::chrono::steady_clock::now();
    json cfg{{"scenario", "multiagent1"}};
    cfg["adaptation"] = true;
    const SimLog rt = run_and_audit(cfg);
    cfg["adaptation"] = false;
    const SimLog fixed = run_and_audit(cfg);
    const double el = seconds_since(t0);
    bool ok = true;
    std::ostringstream d;
    if (rt.status != RunStatus::Completed) {
        ok = false;
        d << "adaptive run: " << rt.failure_reason << " at " << rt.t_fail
          << "; ";
    }
    if (rt.min_h < 0.0) {
        ok = false;
        d << "adaptive min h = " << rt.min_h << "; ";
    }
    if (!(fixed.status == RunStatus::Failure &&
          fixed.failure_reason == "incompatible")) {
        ok = false;
        d << "fixed run: "
          << (fixed.status == RunStatus::Completed ? "completed"
                                                   : fixed.failure_reason)
          << "; ";
    }
    if (el > 30.0) {
        ok = false;
        d << "runtime " << el << " s; ";
    }
    d << "rt min h = " << rt.min_h << ", fixed t_fail = " << fixed.t_fail
      << ", " << el << " s";
    report(7, "multi-agent scenario 1", ok, d.str());
}

void criterion8() {
    bool ok = true;
    for (const SimLog& log : audit_logs)
        if (!audit(log)) ok = false;
    std::ostringstream d;
    d << audit_logs.size() << " runs audited";
    report(8, "forward-invariance audit", ok, d.str());
}

void criterion9() {
    const std::vector<json> suite{
        json{{"scenario", "acc"}, {"T", 10.0}},
        json{{"scenario", "corridor_si"}},
        json{{"scenario", "corridor_di"}},
        json{{"scenario", "multiagent1"}, {"T", 4.0}},
        json{{"scenario", "multiagent2"}, {"T", 4.0}},
    };
    bool ok = true;
    for (const json& cfg : suite) {
        const std::string a = csv_string(run_scenario(cfg));
        const std::string b = csv_string(run_scenario(cfg));
        if (a != b) ok = false;
    }
    report(9, "byte-identical determinism", ok, "");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
