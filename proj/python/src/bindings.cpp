#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "rtcbf/adapt.hpp"
#include "rtcbf/analytic.hpp"
#include "rtcbf/chain.hpp"
#include "rtcbf/lp.hpp"
#include "rtcbf/qp.hpp"
#include "rtcbf/scenarios.hpp"
#include "rtcbf/sim.hpp"
#include "rtcbf/trust.hpp"

namespace py = pybind11;
using namespace rtcbf;

namespace {

py::dict lp_to_dict(const LpResult& r) {
    py::dict d;
    d["status"] = r.status == LpStatus::Optimal
                      ? "optimal"
                      : (r.status == LpStatus::Infeasible ? "infeasible"
                                                          : "unbounded");
    d["z"] = r.z;
    d["certificate"] = r.certificate;
    return d;
}

py::dict qp_to_dict(const QpResult& r) {
    py::dict d;
    d["status"] =
        r.status == QpStatus::Optimal ? "optimal" : "infeasible";
    d["z"] = r.z;
    d["active_set"] = r.active_set;
    d["kkt_residual"] = r.kkt_residual;
    d["certificate"] = r.certificate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rtcbf, m) {
    m.doc() = "rate-tunable control barrier function core";

    m.def("solve_lp",
          [](const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
             const Eigen::VectorXd& w) {
              LinearProgram lp;
              lp.c = c;
              lp.G = G;
              lp.w = w;
              return lp_to_dict(solve_lp(lp));
          },
          py::arg("c"), py::arg("G"), py::arg("w"),
          "minimize c.z subject to G z <= w");

    m.def("solve_qp",
          [](const Eigen::MatrixXd& H, const Eigen::VectorXd& q,
             const Eigen::MatrixXd& G, const Eigen::VectorXd& w) {
              QuadraticProgram qp;
              qp.H = H;
              qp.q = q;
              qp.G = G;
              qp.w = w;
              return qp_to_dict(solve_qp(qp));
          },
          py::arg("H"), py::arg("q"), py::arg("G"), py::arg("w"),
          "minimize 0.5 z.H.z + q.z subject to G z <= w");

    m.def("analytic_cbf_qp",
          [](const Eigen::VectorXd& u_r, double dh_dt, double lf_h,
             const Eigen::RowVectorXd& lg_h, double alpha,
             const std::string& variant) {
              const AnalyticResult r = analytic_cbf_qp(
                  u_r, dh_dt, lf_h, lg_h, alpha,
                  variant == "scaled" ? AnalyticVariant::Scaled
                                      : AnalyticVariant::Kkt);
              py::dict d;
              d["u"] = r.u;
              d["feasible"] = r.feasible;
              return d;
          },
          py::arg("u_r"), py::arg("dh_dt"), py::arg("lf_h"), py::arg("lg_h"),
          py::arg("alpha"), py::arg("variant") = "kkt");

    py::class_<ClassKChain>(m, "ClassKChain")
        .def(py::init<int, const std::vector<double>&, double>(),
             py::arg("relative_degree"), py::arg("nu_init"),
             py::arg("nu_min") = 0.0)
        .def("nu", &ClassKChain::nu, py::arg("order"))
        .def("nu_derivative", &ClassKChain::nu_derivative, py::arg("order"),
             py::arg("d"))
        .def("relative_degree", &ClassKChain::relative_degree);

    m.def("integrate_theta_chain", &integrate_theta_chain, py::arg("chain"),
          py::arg("top_inputs"), py::arg("dt"));

    m.def("nu_inner_bound", &nu_inner_bound, py::arg("psi"),
          py::arg("psi_dot"));
    m.def("sampled_target", &sampled_target, py::arg("psi_next"),
          py::arg("psi_dot_next"), py::arg("nu_d"), py::arg("k_margin"));
    m.def("top_derivative", &top_derivative, py::arg("order_stack"),
          py::arg("nu_target"), py::arg("dt"), py::arg("clamp") = 1e3);
    m.def("shape_alpha", &shape_alpha, py::arg("u_r"), py::arg("u_d"),
          py::arg("dh_dt"), py::arg("lf_h"), py::arg("lg_h"));
    m.def("shape_nu", &shape_nu, py::arg("h"), py::arg("dh_dt"),
          py::arg("lf_h"), py::arg("lg_h"), py::arg("u_r"), py::arg("u_d"));

    m.def("trust_scores",
          [](double margin, const Eigen::VectorXd& belief,
             const Eigen::VectorXd& s_hat, const Eigen::VectorXd& xdot_j,
             double beta, double rho_m_bar) {
              TrustState s;
              s.margin = margin;
              trust_scores(s, belief, s_hat, xdot_j, beta, rho_m_bar);
              py::dict d;
              d["rho_m"] = s.rho_m;
              d["rho_gamma"] = s.rho_gamma;
              d["rho"] = s.rho;
              return d;
          },
          py::arg("margin"), py::arg("belief"), py::arg("s_hat"),
          py::arg("xdot_j"), py::arg("beta") = 1.0,
          py::arg("rho_m_bar") = 0.2);
    m.def("combine_trust", &combine_trust, py::arg("rho_m"),
          py::arg("rho_gamma"), py::arg("rho_m_bar"));
    m.def("alpha_rate_from_trust", &alpha_rate_from_trust, py::arg("rho"),
          py::arg("gain"));

    m.def("leader_accel", &leader_accel, py::arg("t"));

    m.def("run_scenario",
          [](const std::string& config_text) {
              const nlohmann::json cfg = nlohmann::json::parse(config_text);
              const SimLog log = run_scenario(cfg);
              py::dict d;
              d["status"] = log.status == RunStatus::Completed ? "completed"
                                                               : "failure";
              d["failure_reason"] = log.failure_reason;
              d["t_fail"] = log.t_fail;
              d["min_h"] = log.min_h;
              d["columns"] = log.columns;
              d["rows"] = log.rows;
              return d;
          },
          py::arg("config_json"),
          "run a scenario from a json config string");

    m.def("validate_config", [](const std::string& config_text) {
        validate_config(nlohmann::json::parse(config_text));
    });
}
