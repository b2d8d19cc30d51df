#include "doctest.h"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "bergman/measure.hpp"

using namespace bergman;

namespace {

// Midpoint grid over a square around the region, n = 1, density c_a (1-|w|^2)^a / pi.
double grid_volume_1d(const Region& region, double alpha, int cells) {
    const EuclideanBall box = region.bounding_ball();
    const double h = 2.0 * box.radius / cells;
    const double c = normalizing_constant(1, alpha);
    double sum = 0.0;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            const CVector w{box.center[0] + cplx(-box.radius + (i + 0.5) * h, -box.radius + (j + 0.5) * h)};
            if (w.norm_sq() >= 1.0 || !region.contains(w)) continue;
            sum += c * std::pow(1.0 - w.norm_sq(), alpha);
        }
    }
    return sum * h * h / std::numbers::pi;
}

}  // namespace

TEST_CASE("normalizing constants") {
    CHECK(normalizing_constant(3, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normalizing_constant(1, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(normalizing_constant(2, 0.5) == doctest::Approx(1.875).epsilon(1e-14));
    CHECK(normalizing_constant(2, -1.0) == 1.0);
    CHECK(normalizing_constant(2, -3.0) == 1.0);
}

TEST_CASE("densities") {
    CHECK(density(Measure::weighted(0.0), CVector{0.3, 0.2}) == 1.0);
    CHECK(density(Measure::invariant(), CVector{0.0, 0.0}) == 1.0);
    CHECK(density(Measure::weighted(2.0), CVector{std::sqrt(0.5)}) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("radial law inverts the regularized incomplete beta") {
    for (int n = 1; n <= 3; ++n) {
        for (double a : {-0.5, 0.0, 1.0, 2.5}) {
            const RadialLaw law(n, a);
            for (double v : {1e-9, 0.01, 0.3, 0.5, 0.77, 0.999999}) {
                const double t = 1.0 - law.sample_gap(v);
                // 1 - I_t(n, a+1) = v  <=>  t = I^-1(n, a+1; 1 - v)
                const double ref = boost::math::ibeta_inv(static_cast<double>(n), a + 1.0, 1.0 - v);
                CHECK(t == doctest::Approx(ref).epsilon(1e-9));
            }
            CHECK(law.mass() == doctest::Approx(1.0 / normalizing_constant(n, a)).epsilon(1e-13));
        }
    }
}

TEST_CASE("truncated radial laws stay inside the limit") {
    const RadialLaw law(2, 1.0, 0.25);
    for (double v : {1e-6, 0.5, 1 - 1e-9}) CHECK(1.0 - law.sample_gap(v) <= 0.25 + 1e-15);
    // mass = (1/c) I_T(n, a+1)
    CHECK(law.mass() == doctest::Approx(boost::math::ibeta(2.0, 2.0, 0.25) / 3.0).epsilon(1e-13));
    const RadialLaw inv(1, -2.0, 0.5);
    CHECK(inv.mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("probability normalization") {
    for (int n = 1; n <= 3; ++n) {
        for (double a : {-0.5, 0.0, 1.0, 2.5}) {
            QuadSpec spec;
            spec.node_count = 20000;
            spec.seed = 17;
            spec.proposal_alpha = 0.0;
            const Estimate e = volume(Region::whole(n), a, spec);
            CHECK(std::abs(e.real() - 1.0) <= 4.0 * e.std_error + 1e-12);
        }
    }
}

TEST_CASE("odd integrands vanish") {
    QuadSpec spec;
    spec.node_count = 20000;
    const Estimate e = integrate([](const CVector& w) { return w[0]; }, Region::whole(2), Measure::weighted(1.0), spec);
    CHECK(std::abs(e.value) <= 4.0 * e.std_error);
}

TEST_CASE("invariant volume of Bergman balls") {
    const double r = std::tanh(1.0);
    const double exact = r * r / (1 - r * r);
    CHECK(invariant_ball_volume(1, 1.0) == doctest::Approx(exact).epsilon(1e-13));
    QuadSpec spec;
    spec.node_count = 50000;
    const Estimate at0 = integrate([](const CVector&) { return 1.0; }, Region::bergman_ball(BallPoint::origin(1), 1.0),
                                   Measure::invariant(), spec);
    CHECK(at0.real() == doctest::Approx(exact).epsilon(1e-12));
    const Estimate far = pushforward_bergman_ball([](const CVector&) { return 1.0; }, BallPoint({0.9}), 1.0,
                                                  Measure::invariant(), spec);
    CHECK(std::abs(far.real() - exact) <= 3.0 * far.std_error + 1e-12);
}

TEST_CASE("pushforward agrees with rejection") {
    QuadSpec spec;
    spec.node_count = 200000;
    spec.seed = 4;
    const BallPoint c({0.4, cplx(0.1, -0.3)});
    auto g = [](const CVector& w) { return 1.0 + std::norm(w[0]) + w[1].real(); };
    for (const Measure mu : {Measure::invariant(), Measure::weighted(0.0), Measure::weighted(1.5)}) {
        const Estimate a = pushforward_bergman_ball(g, c, 0.8, mu, spec);
        const Estimate b =
            integrate(g, Region::bergman_ball(c, 0.8), mu, spec.with_strategy(Strategy::Rejection).with_stream("rej"));
        CHECK(std::abs(a.real() - b.real()) <= 3.0 * std::hypot(a.std_error, b.std_error));
    }
}

TEST_CASE("pushforward volumes match a grid in one dimension") {
    QuadSpec spec;
    spec.node_count = 200000;
    for (double m : {0.0, 0.5, 0.9}) {
        for (double a : {0.0, 1.0}) {
            const BallPoint c({cplx(m * 0.6, m * 0.8)});
            const Region ball = Region::bergman_ball(c, 1.0);
            const double grid = grid_volume_1d(ball, a, 1500);
            const double mc = volume(ball, a, spec).real();
            CHECK(mc == doctest::Approx(grid).epsilon(0.01));
        }
    }
}

TEST_CASE("tube volumes") {
    QuadSpec spec;
    spec.node_count = 100000;
    // rotation invariance
    const double s = 1 / std::sqrt(2.0);
    const Estimate a = volume(Region::tube(CVector{1.0, 0.0}, 0.4), 1.0, spec);
    const Estimate b = volume(Region::tube(CVector{cplx(0, s), s}, 0.4), 1.0, spec.with_stream("other"));
    CHECK(std::abs(a.real() - b.real()) <= 3.0 * std::hypot(a.std_error, b.std_error));
    // tube sampler agrees with rejection
    const Estimate c = volume(Region::tube(CVector{1.0, 0.0}, 0.4), 1.0,
                              spec.with_strategy(Strategy::Rejection).with_stream("rej").with_nodes(400000));
    CHECK(std::abs(a.real() - c.real()) <= 3.0 * std::hypot(a.std_error, c.std_error));
    // n = 1 grid oracle
    const Region t1 = Region::tube(CVector{1.0}, 0.5);
    CHECK(volume(t1, 0.0, spec).real() == doctest::Approx(grid_volume_1d(t1, 0.0, 1500)).epsilon(0.01));
    // a tube with r^2 >= 2 covers the ball
    CHECK(volume(Region::tube(CVector{0.0, 1.0}, 1.5), 0.0, spec).real() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("pole mixture is unbiased") {
    QuadSpec spec;
    spec.node_count = 100000;
    spec.strategy = Strategy::PoleMixture;
    spec.poles = {CVector{0.95, 0.0}, CVector{0.0, cplx(0, -0.9)}};
    auto g = [](const CVector& w) { return std::norm(w[0]); };
    const Estimate a = integrate(g, Region::whole(2), Measure::weighted(1.0), spec);
    // |w1|^2 against v_1 in n = 2: 1/(n+1+alpha) = 1/4
    CHECK(std::abs(a.real() - 0.25) <= 4.0 * a.std_error);
}

TEST_CASE("estimates do not depend on the worker count") {
    QuadSpec spec;
    spec.node_count = 10000;
    auto g = [](const CVector& w) { return std::exp(w[0]); };
    const Estimate a = integrate(g, Region::whole(2), Measure::weighted(0.5), spec);
    spec.threads = 4;
    const Estimate b = integrate(g, Region::whole(2), Measure::weighted(0.5), spec);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("non-finite contributions are reported") {
    QuadSpec spec;
    spec.node_count = 100;
    const Estimate e = integrate([](const CVector& w) { return w[0].real() > 0.5 ? INFINITY : 1.0; }, Region::whole(1),
                                 Measure::weighted(0.0), spec);
    CHECK_FALSE(e.valid);
    REQUIRE(e.bad_index.has_value());
}

TEST_CASE("doubling of the pseudo-metric balls") {
    QuadSpec spec;
    spec.node_count = 50000;
    const DoublingReport rep = doubling_check(BallMetric::Rho, 1, 0.0, 100, 0.05, 1.0, spec);
    CHECK(rep.evaluated > 0);
    CHECK(rep.min_ratio >= 1.0);
    CHECK(std::isfinite(rep.constant));
}
