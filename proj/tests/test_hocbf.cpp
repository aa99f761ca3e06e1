#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rtcbf/hocbf.hpp"

using namespace rtcbf;

namespace {

// Time-only barrier oracle: h(t) = offset + sin(w t), exact derivatives.
BarrierSpec sine_barrier(int r, double offset, double w, double b_gain) {
    BarrierSpec spec;
    spec.relative_degree = r;
    spec.oracle = [=](double t, const Eigen::VectorXd&) {
        auto deriv = [=](int j) {
            switch (j % 4) {
                case 0: return std::pow(w, j) * std::sin(w * t);
                case 1: return std::pow(w, j) * std::cos(w * t);
                case 2: return -std::pow(w, j) * std::sin(w * t);
                default: return -std::pow(w, j) * std::cos(w * t);
            }
        };
        BarrierSample s;
        s.h_derivs.resize(r);
        s.h_derivs(0) = offset + deriv(0);
        for (int j = 1; j < r; ++j) s.h_derivs(j) = deriv(j);
        s.a = deriv(r);
        s.B = Eigen::RowVectorXd::Constant(1, b_gain);
        return s;
    };
    return spec;
}

BarrierSpec fixed_barrier(const Eigen::VectorXd& derivs, double a,
                          const Eigen::RowVectorXd& B) {
    BarrierSpec spec;
    spec.relative_degree = static_cast<int>(derivs.size());
    spec.oracle = [=](double, const Eigen::VectorXd&) {
        BarrierSample s;
        s.h_derivs = derivs;
        s.a = a;
        s.B = B;
        return s;
    };
    return spec;
}

}  // namespace

TEST_CASE("derived: r=1 stack is h itself with the oracle split") {
    const auto spec = fixed_barrier(Eigen::VectorXd::Constant(1, 2.0), -0.3,
                                    Eigen::RowVectorXd::Constant(1, 1.5));
    const ClassKChain chain(1, {0.7});
    const auto st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
    CHECK(st.order() == 1);
    CHECK(st.psi(0) == 2.0);
    CHECK(st.a_psi == -0.3);
    CHECK(st.B_psi(0) == 1.5);
}

TEST_CASE("derived: r=2 hand evaluation psi1 = hdot + nu1 h") {
    Eigen::VectorXd d(2);
    d << 1.0, 0.5;
    const auto spec =
        fixed_barrier(d, 0.0, Eigen::RowVectorXd::Constant(1, 1.0));
    const ClassKChain chain(2, {2.0, 0.4});
    const auto st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
    CHECK(st.psi(0) == 1.0);
    CHECK(st.psi(1) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("derived: r=2 drift part collects nudot1 h + nu1 hdot") {
    Eigen::VectorXd d(2);
    d << 1.0, 0.5;
    const auto spec =
        fixed_barrier(d, 0.0, Eigen::RowVectorXd::Constant(1, 1.0));
    ClassKChain chain(2, {2.0, 0.4});
    // nudot1 = 0
    auto st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
    CHECK(st.a_psi == doctest::Approx(1.0).epsilon(1e-14));
    // nudot1 = 3: drift gains 3 * h
    chain.raw_stacks()[0] << 2.0, 3.0;
    st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
    CHECK(st.a_psi == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("derived: r=2 stack matches the explicit closed form") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd d(2);
        d << 2.0 + normal(rng), normal(rng);
        const double a = normal(rng);
        const Eigen::RowVectorXd B = Eigen::RowVectorXd::Constant(1, normal(rng));
        const double nu1 = 0.1 + std::abs(normal(rng));
        const double nu1dot = normal(rng);
        const double nu2 = 0.1 + std::abs(normal(rng));
        const auto spec = fixed_barrier(d, a, B);
        ClassKChain chain(2, {nu1, nu2});
        chain.raw_stacks()[0] << nu1, nu1dot;
        const auto st =
            derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
        CHECK(st.psi(1) ==
              doctest::Approx(d(1) + nu1 * d(0)).epsilon(1e-12));
        CHECK(st.a_psi ==
              doctest::Approx(a + nu1dot * d(0) + nu1 * d(1)).epsilon(1e-12));
        CHECK((st.B_psi - B).norm() <= 1e-14);
        // forward-recursion identity at the top row
        const LinearConstraintRow row = hocbf_row(st, nu2);
        CHECK(row.d ==
              doctest::Approx(-st.a_psi - nu2 * st.psi(1)).epsilon(1e-12));
    }
}

TEST_CASE("derived: r=3 hand expansion of the third derived barrier") {
    // psi2 = hdd + (nu1dot + nu2) hd + (nu1dd? ...) expanded by hand below.
    Eigen::VectorXd d(3);
    d << 1.2, 0.4, -0.3;  // h, hd, hdd
    const double a = 0.25;  // hddd drift
    const Eigen::RowVectorXd B = Eigen::RowVectorXd::Constant(1, 2.0);
    const double nu1 = 0.6, nu1d = 0.2, nu1dd = -0.1;
    const double nu2 = 0.9, nu2d = 0.5;
    const double nu3 = 1.1;
    const auto spec = fixed_barrier(d, a, B);
    ClassKChain chain(3, {nu1, nu2, nu3});
    chain.raw_stacks()[0] << nu1, nu1d, nu1dd;
    chain.raw_stacks()[1] << nu2, nu2d;
    const auto st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));

    const double h = d(0), hd = d(1), hdd = d(2);
    const double psi1 = hd + nu1 * h;
    const double psi1d = hdd + nu1d * h + nu1 * hd;
    const double psi2 = psi1d + nu2 * psi1;
    CHECK(st.psi(1) == doctest::Approx(psi1).epsilon(1e-12));
    CHECK(st.psi(2) == doctest::Approx(psi2).epsilon(1e-12));
    // psi2 drift: d/dt of psi1d + nu2 psi1 with hddd -> a (drift part).
    const double psi1dd_drift =
        a + nu1dd * h + 2.0 * nu1d * hd + nu1 * hdd;
    const double psi2d_drift =
        psi1dd_drift + nu2d * psi1 + nu2 * psi1d;
    CHECK(st.a_psi == doctest::Approx(psi2d_drift).epsilon(1e-12));
    CHECK((st.B_psi - B).norm() <= 1e-14);
    // stored intermediate derivatives satisfy psi^k = psi_dot^{k-1} + nu^k psi^{k-1}
    CHECK(st.psi(1) ==
          doctest::Approx(st.psi_dot(0) + nu1 * st.psi(0)).epsilon(1e-10));
    CHECK(st.psi(2) ==
          doctest::Approx(st.psi_dot(1) + nu2 * st.psi(1)).epsilon(1e-10));
}

TEST_CASE("derived: finite-difference self-consistency for r=2 and r=3") {
    const double dt = 1e-4;
    for (int r : {2, 3}) {
        const auto spec = sine_barrier(r, 3.0, 1.3, 0.5);
        ClassKChain chain(r, r == 2 ? std::vector<double>{0.8, 0.5}
                                    : std::vector<double>{0.8, 0.5, 0.3});
        const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
        for (double t : {0.0, 0.7, 2.1}) {
            const auto now = derived_barriers(spec, chain, t, x);
            const auto nxt = derived_barriers(spec, chain, t + dt, x);
            for (int k = 1; k < r; ++k) {
                const double fd = (nxt.psi(k - 1) - now.psi(k - 1)) / dt;
                CHECK(std::abs(fd + chain.nu(k) * now.psi(k - 1) -
                               now.psi(k)) <= 10.0 * dt);
            }
            // top derivative drift (u = 0)
            const double fd_top = (nxt.psi(r - 1) - now.psi(r - 1)) / dt;
            CHECK(std::abs(fd_top - now.a_psi) <= 10.0 * dt);
        }
    }
}

TEST_CASE("derived: top derivative is affine in u") {
    Eigen::VectorXd d(2);
    d << 1.0, 0.5;
    const Eigen::RowVectorXd B = (Eigen::RowVectorXd(2) << 0.7, -1.2).finished();
    const auto spec = fixed_barrier(d, -0.4, B);
    const ClassKChain chain(2, {0.5, 0.5});
    const auto st = derived_barriers(spec, chain, 0.0, Eigen::VectorXd::Zero(1));
    Eigen::VectorXd u1(2), u2(2);
    u1 << 0.3, -0.8;
    u2 << -1.1, 0.4;
    const double at = [&](const Eigen::VectorXd& u) {
        return st.a_psi + st.B_psi.dot(u);
    }(u1 + u2);
    const double sum = (st.a_psi + st.B_psi.dot(u1)) +
                       (st.a_psi + st.B_psi.dot(u2)) - st.a_psi;
    CHECK(std::abs(at - sum) <= 1e-12);
}

TEST_CASE("derived: lower derivatives do not depend on u by construction") {
    // The oracle's h^(j), j < r are input-free; the stack only reads them.
    const auto spec = sine_barrier(2, 3.0, 0.9, 1.0);
    const ClassKChain chain(2, {0.5, 0.5});
    const auto a = derived_barriers(spec, chain, 0.3, Eigen::VectorXd::Zero(1));
    const auto b = derived_barriers(spec, chain, 0.3, Eigen::VectorXd::Ones(1));
    CHECK(a.psi(0) == b.psi(0));
    CHECK(a.psi(1) == b.psi(1));
}

TEST_CASE("hocbf_row: hand examples") {
    DerivedBarrierStack st;
    st.psi = Eigen::VectorXd::Constant(1, 2.0);
    st.a_psi = -2.0;
    st.B_psi = Eigen::RowVectorXd::Constant(1, 1.0);
    LinearConstraintRow row = hocbf_row(st, 1.0);
    CHECK(row.sense == RowSense::Ge);
    CHECK(row.c(0) == 1.0);
    CHECK(row.d == doctest::Approx(0.0));

    st.psi(0) = 0.0;
    row = hocbf_row(st, 1.0);
    CHECK(row.d == doctest::Approx(2.0));  // B u >= -a_psi

    st.psi(0) = 1.0;
    st.a_psi = 5.0;
    st.B_psi(0) = 0.0;
    row = hocbf_row(st, 0.5);
    CHECK(row.c(0) == 0.0);
    CHECK(row.d == doctest::Approx(-5.5));

    CHECK_THROWS_AS(hocbf_row(st, -0.1), std::invalid_argument);
}

TEST_CASE("clf_row: hand examples over (u, delta)") {
    LyapunovSpec lyap;
    lyap.rate = 10.0;
    lyap.oracle = [](double, const Eigen::VectorXd& x) {
        LyapunovSample s;
        s.V = (x(0) - 24.0) * (x(0) - 24.0);
        s.p = 2.0 * (x(0) - 24.0) * (-0.5);
        s.Q = Eigen::RowVectorXd::Constant(1, 2.0 * (x(0) - 24.0) * 0.1);
        return s;
    };
    const LinearConstraintRow row =
        clf_row(lyap, 0.0, Eigen::VectorXd::Constant(1, 20.0));
    CHECK(row.sense == RowSense::Le);
    CHECK(row.c.size() == 2);
    CHECK(row.c(0) == doctest::Approx(2.0 * (-4.0) * 0.1));
    CHECK(row.c(1) == -1.0);  // -delta
    CHECK(row.d == doctest::Approx(-10.0 * 16.0 - 2.0 * (-4.0) * (-0.5)));

    LyapunovSpec on_target;
    on_target.rate = 1.0;
    on_target.oracle = [](double, const Eigen::VectorXd&) {
        LyapunovSample s;
        s.V = 0.0;
        s.p = 0.7;
        s.Q = Eigen::RowVectorXd::Constant(1, 0.2);
        return s;
    };
    const LinearConstraintRow r2 =
        clf_row(on_target, 0.0, Eigen::VectorXd::Zero(1));
    CHECK(r2.d == doctest::Approx(-0.7));

    LyapunovSpec vac;
    vac.rate = 1.0;
    vac.oracle = [](double, const Eigen::VectorXd&) {
        LyapunovSample s;
        s.V = 1.0;
        s.p = -1.0;
        s.Q = Eigen::RowVectorXd::Constant(1, 0.0);
        return s;
    };
    const LinearConstraintRow r3 = clf_row(vac, 0.0, Eigen::VectorXd::Zero(1));
    // -1 <= -1 + delta holds at delta = 0
    CHECK(r3.c(0) == 0.0);
    CHECK(r3.d == doctest::Approx(0.0));
}
