#include "doctest.h"

#include <cmath>

#include "bergman/operators.hpp"

using namespace bergman;

namespace {

double tau_ball(int n, double gamma) { return std::pow(std::sinh(gamma), 2 * n); }

HoloFun test_fun(int n) {
    CVector a(n);
    a[0] = cplx(0.5, 0.3);
    HoloFun f = HoloFun::kernel_power(BallPoint(a), 1.5, cplx(0.8, -0.2));
    f += HoloFun::coordinate(n, n - 1);
    return f;
}

CVector point(int n, cplx first, cplx last = 0.0) {
    CVector z(n);
    z[0] = first;
    if (n > 1) z[n - 1] = last;
    return z;
}

}  // namespace

TEST_CASE("functionals of constants") {
    for (int n : {1, 2}) {
        const HoloFun one = HoloFun::constant(n, 1.0);
        const CVector z = point(n, 0.4, cplx(0, 0.3));
        FunctionalOptions opt;
        opt.inner_nodes = 256;
        CHECK(apply_functional(FunctionalSelector::maximal(1.0), one, z, opt) == doctest::Approx(1.0));
        CHECK(apply_functional(FunctionalSelector::tent(1.0, 2.0), one, z, opt) ==
              doctest::Approx(std::sqrt(tau_ball(n, 1.0))).epsilon(1e-12));
        CHECK(apply_functional(FunctionalSelector::tent(0.5, 3.0), one, z, opt) ==
              doctest::Approx(std::cbrt(tau_ball(n, 0.5))).epsilon(1e-12));
        CHECK(apply_functional(FunctionalSelector::area_radial(1.0, 2.0), one, z, opt) == 0.0);
        CHECK(apply_functional(FunctionalSelector::area_grad(1.0, 2.0), one, z, opt) == 0.0);
        CHECK(apply_functional(FunctionalSelector::hl_max(1.0, 2.0, 0.0), one, z, opt) == doctest::Approx(1.0));
    }
}

TEST_CASE("maximal function of a coordinate") {
    // sup of |w_1| over D(0, gamma) is tanh(gamma)
    FunctionalOptions opt;
    opt.inner_nodes = 512;
    for (int n : {1, 2}) {
        const double v = apply_functional(FunctionalSelector::maximal(1.0), HoloFun::coordinate(n, 0), CVector(n), opt);
        CHECK(v <= std::tanh(1.0) + 1e-12);
        CHECK(v == doctest::Approx(std::tanh(1.0)).epsilon(2e-3));
    }
}

TEST_CASE("tent functional of a coordinate in the disc") {
    // int_{|w| < t} |w|^2 dtau = 1/(1-T) - 1 + log(1-T), T = tanh(gamma)^2
    const double gamma = 0.8;
    const double T = std::pow(std::tanh(gamma), 2);
    const double exact = std::sqrt(1.0 / (1.0 - T) - 1.0 + std::log(1.0 - T));
    FunctionalOptions opt;
    opt.inner_nodes = 20000;
    const double v = apply_functional(FunctionalSelector::tent(gamma, 2.0), HoloFun::coordinate(1, 0), CVector(1), opt);
    CHECK(v == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("supremum variants agree") {
    const HoloFun f = test_fun(2);
    const CVector z = point(2, cplx(0.2, 0.5), 0.3);
    CHECK(apply_functional(FunctionalSelector::tent_sup(1.0), f, z) ==
          apply_functional(FunctionalSelector::maximal(1.0), f, z));
    CHECK(apply_functional(FunctionalSelector::maximal_k(1.0, 0), f, z) ==
          doctest::Approx(apply_functional(FunctionalSelector::maximal(1.0), f, z)).epsilon(1e-12));
}

TEST_CASE("functionals grow with the ball") {
    const HoloFun f = test_fun(2);
    const CVector z = point(2, 0.6, cplx(0.1, 0.2));
    FunctionalOptions opt;
    opt.ascent_levels = 0;
    const InnerNodes nodes = InnerNodes::draw(2, 1.5, 1024, 3, stream_tag("nested"));
    for (auto make : {+[](double g) { return FunctionalSelector::maximal(g); },
                      +[](double g) { return FunctionalSelector::area_radial(g, 2.0); },
                      +[](double g) { return FunctionalSelector::area_invgrad(g, 3.0); },
                      +[](double g) { return FunctionalSelector::tent(g, 2.0); }}) {
        double prev = 0.0;
        for (double g : {0.3, 0.7, 1.0, 1.5}) {
            const double v = FunctionalEvaluator(make(g), f, nodes, opt)(z);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("Hardy-Littlewood maximal function dominates and grows with centres") {
    const HoloFun f = test_fun(1);
    const CVector z{cplx(0.3, -0.4)};
    FunctionalOptions few, many;
    few.hl_centers = 32;
    many.hl_centers = 256;
    const auto sel = FunctionalSelector::hl_max(1.0, 2.0, 1.0);
    const double a = apply_functional(sel, f, z, few);
    const double b = apply_functional(sel, f, z, many);
    CHECK(a <= b);
    // never below the smallest value of |f| near z
    CHECK(b > 0.0);
    CHECK(b <= apply_functional(FunctionalSelector::maximal(2.0), f, z) + 1e-12);
}

TEST_CASE("selector validation and labels") {
    CHECK_THROWS(FunctionalSelector::tent(1.0, 1.0).validate());
    CHECK_THROWS(FunctionalSelector::maximal(0.0).validate());
    CHECK_THROWS(FunctionalSelector::hl_max(1.0, 2.0, -1.5).validate());
    CHECK_NOTHROW(FunctionalSelector::maximal(1.0).validate());
    CHECK(FunctionalSelector::area_radial_k(1.0, 2.0, 2).label() == "area-radial-k(gamma=1,q=2,k=2)");
    CHECK(FunctionalSelector::maximal(0.5).label() == "maximal(gamma=0.5)");
}

TEST_CASE("Bergman kernel") {
    NodeRng rng(11, stream_tag("kernel-test"), 0);
    for (int n : {1, 3}) {
        for (int i = 0; i < 50; ++i) {
            const CVector z = 0.95 * std::pow(rng.uniform(), 0.5) * random_direction(n, rng);
            const CVector w = 0.95 * std::pow(rng.uniform(), 0.5) * random_direction(n, rng);
            for (double alpha : {-0.5, 0.0, 2.0}) {
                CHECK(bergman_kernel(alpha, z, w) == std::conj(bergman_kernel(alpha, w, z)));
                CHECK(std::abs(bergman_kernel(alpha, z, CVector(n)) - 1.0) < 1e-15);
            }
        }
    }
    const CVector z{0.5};
    CHECK(bergman_kernel(0.0, z, z).real() == doctest::Approx(1.0 / 0.5625));
}

TEST_CASE("Bergman projection reproduces holomorphic functions") {
    const QuadSpec spec = QuadSpec{}.with_nodes(40000).with_stream("projection-test");
    const CVector z = point(2, cplx(0.3, 0.1), cplx(-0.2, 0.0));
    for (double alpha : {0.0, 1.0}) {
        const Estimate one = bergman_project([](const CVector&) { return cplx(1.0); }, alpha, z, spec);
        CHECK(std::abs(one.value - 1.0) < 4 * one.std_error + 1e-12);
        const HoloFun f = HoloFun::coordinate(2, 0) + HoloFun::coordinate(2, 1);
        const Estimate pf = bergman_project([&](const CVector& w) { return f(w); }, alpha, z, spec);
        CHECK(std::abs(pf.value - f(z)) < 4 * pf.std_error);
    }
}

TEST_CASE("kernel fibres match the kernel integrals") {
    const int n = 2;
    const HoloFun f = HoloFun::kernel_power(BallPoint(point(n, 0.3, cplx(0, 0.2))), 1.0) + HoloFun::coordinate(n, 1);
    const CVector z = point(n, cplx(0.2, 0.1), 0.25);
    const CVector w = point(n, cplx(-0.1, 0.2), cplx(0.15, 0.0));
    const QuadSpec spec = QuadSpec{}.with_nodes(40000).with_stream("fibre-test");
    for (VectorKernel kind : {VectorKernel::Tent, VectorKernel::Radial, VectorKernel::Grad, VectorKernel::InvGrad}) {
        const VectorKernelId id{kind, 1.0, 1.0, 2.0};
        const CVector exact = kernel_fiber(id, f, z, w);
        const auto est = kernel_fiber_by_integration(id, f, z, w, spec);
        REQUIRE(static_cast<int>(est.size()) == exact.dim());
        for (int j = 0; j < exact.dim(); ++j) {
            INFO(id.label() << " component " << j);
            CHECK(std::abs(est[j].value - exact[j]) < 4.5 * est[j].std_error + 1e-3);
        }
    }
}

TEST_CASE("vector kernel norms equal the corresponding functionals") {
    const int n = 2;
    const HoloFun f = test_fun(n);
    const CVector z = point(n, cplx(0.5, 0.2), -0.3);
    const InnerNodes nodes = InnerNodes::draw(n, 1.0, 512, 5, stream_tag("identity"));
    FunctionalOptions opt;
    opt.numeric_invariant_gradient = false;
    const std::pair<VectorKernel, FunctionalSelector> cases[] = {
        {VectorKernel::Tent, FunctionalSelector::tent(1.0, 2.0)},
        {VectorKernel::Radial, FunctionalSelector::area_radial(1.0, 2.0)},
        {VectorKernel::Grad, FunctionalSelector::area_grad(1.0, 2.0)},
        {VectorKernel::InvGrad, FunctionalSelector::area_invgrad(1.0, 2.0)},
    };
    for (const auto& [kind, sel] : cases) {
        const double direct = vector_kernel_apply({kind, 0.0, 1.0, 2.0}, f, z, nodes);
        const double functional = FunctionalEvaluator(sel, f, nodes, opt)(z);
        CHECK(direct == doctest::Approx(functional).epsilon(1e-9));
    }
}

TEST_CASE("tent kernel at the origin pole") {
    const InnerNodes nodes = InnerNodes::draw(2, 1.0, 128, 1, stream_tag("tent-origin"));
    const double v = kernel_e_norm({VectorKernel::Tent, 0.5, 1.0, 2.0}, point(2, 0.7), CVector(2), nodes);
    CHECK(v == doctest::Approx(std::sqrt(tau_ball(2, 1.0))).epsilon(1e-12));
}

TEST_CASE("kernel size and smoothness constants") {
    for (int n : {1, 2}) {
        const auto pairs = sample_pairs(n, 2000, 9);
        for (double alpha : {0.0, 1.0}) {
            const double m = n + 1.0 + alpha;
            const KernelConstant c = kernel_size_check(alpha, pairs);
            CHECK(c.evaluated == pairs.size());
            CHECK(c.constant > 0.5);
            CHECK(c.constant <= std::pow(3.0, m) + 1e-9);
        }
        const auto triples = sample_triples(n, 2000, 9);
        const KernelConstant s = kernel_smoothness_check(0.0, triples, 4.0);
        CHECK(s.evaluated > 100);
        CHECK(std::isfinite(s.constant));
    }
    const auto growth = smoothness_without_filter(1, 0.0, {1e-1, 1e-2, 1e-3});
    CHECK(growth[1] > 10 * growth[0]);
    CHECK(growth[2] > 10 * growth[1]);
}
