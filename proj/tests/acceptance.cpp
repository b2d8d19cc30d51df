// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-bergman-cli]
// Reference values below are computed here from closed forms, not taken from
// the library under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "bergman/harness.hpp"

using namespace bergman;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

CVector point_in_ball(int n, NodeRng& rng, double max_norm) {
    CVector z(n);
    double len = 0.0;
    for (int k = 0; k < n; ++k) {
        z[k] = cplx(rng.normal(), rng.normal());
        len += std::norm(z[k]);
    }
    const double r = max_norm * std::pow(rng.uniform(), 1.0 / (2.0 * n));
    return (r / std::sqrt(len)) * z;
}

// phi_a(z) = (a - P_a z - s Q_a z) / (1 - <z,a>), s = sqrt(1-|a|^2).
CVector reference_moebius(const CVector& a, const CVector& z) {
    const int n = a.dim();
    const double aa = a.norm_sq();
    cplx za = 0.0;
    for (int k = 0; k < n; ++k) za += z[k] * std::conj(a[k]);
    CVector out(n);
    const double s = std::sqrt(1.0 - aa);
    for (int k = 0; k < n; ++k) {
        const cplx proj = aa > 0.0 ? za / aa * a[k] : 0.0;
        out[k] = (a[k] - proj - s * (z[k] - proj)) / (1.0 - za);
    }
    return out;
}

double reference_c_alpha(int n, double alpha) {
    return std::tgamma(n + alpha + 1.0) / (std::tgamma(n + 1.0) * std::tgamma(alpha + 1.0));
}

// v_alpha(D(x, gamma)) in the disc by the midpoint rule on the hull of the
// Euclidean disc that D(x, gamma) is.
double reference_disc_volume(double x, double gamma, double alpha, int cells) {
    const double t = std::tanh(gamma);
    const double centre = x * (1.0 - t * t) / (1.0 - t * t * x * x);
    const double radius = t * (1.0 - x * x) / (1.0 - t * t * x * x);
    const double h = 2.0 * radius / cells;
    double sum = 0.0;
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
            const double u = centre - radius + (i + 0.5) * h, v = -radius + (j + 0.5) * h;
            if ((u - centre) * (u - centre) + v * v < radius * radius) sum += std::pow(1.0 - u * u - v * v, alpha);
        }
    return (alpha + 1.0) / std::numbers::pi * sum * h * h;
}

std::string fmt(double x) { return format_number(x); }

using Criterion = std::function<void(Outcome&)>;

// ---------------------------------------------------------------------------

void automorphisms(Outcome& out) {
    const auto start = std::chrono::steady_clock::now();
    double e0 = 0, e1 = 0, e2 = 0, e3 = 0, eref = 0;
    for (int n : {1, 2, 3}) {
        for (std::uint64_t i = 0; i < 1000; ++i) {
            NodeRng rng(2024, 1, i * 3 + n);
            const CVector z = point_in_ball(n, rng, 0.99), w = point_in_ball(n, rng, 0.99);
            const Automorphism phi{BallPoint(z)};
            e0 = std::max(e0, (phi.apply(CVector(n)) - z).norm());
            e1 = std::max(e1, phi.apply(z).norm());
            const CVector pw = phi.apply(w);
            e2 = std::max(e2, (phi.apply(pw) - w).norm());
            cplx zw = 0.0;
            for (int k = 0; k < n; ++k) zw += z[k] * std::conj(w[k]);
            const double lhs = 1.0 - pw.norm_sq();
            const double rhs = (1.0 - z.norm_sq()) * (1.0 - w.norm_sq()) / std::norm(1.0 - zw);
            e3 = std::max(e3, std::abs(lhs - rhs) / rhs);
            eref = std::max(eref, (pw - reference_moebius(z, w)).norm());
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.detail << "origin " << fmt(e0) << ", swap " << fmt(e1) << ", involution " << fmt(e2) << ", identity "
               << fmt(e3) << ", vs reference formula " << fmt(eref) << ", " << fmt(secs) << " s";
    out.require(e0 <= 1e-12, "phi_z(0) = z");
    out.require(e1 <= 1e-12, "phi_z(z) = 0");
    out.require(e2 <= 1e-10, "involution");
    out.require(e3 <= 1e-10, "fundamental identity");
    out.require(eref <= 1e-10, "reference formula");
    out.require(secs < 5.0, "runtime");
}

void metrics(Outcome& out) {
    double asym = 0, excess = -1, rho_c = 0;
    for (int n : {1, 2, 3}) {
        for (std::uint64_t i = 0; i < 10000; ++i) {
            NodeRng rng(2024, 2, i * 3 + n);
            const CVector x = point_in_ball(n, rng, 0.999), y = point_in_ball(n, rng, 0.999),
                          z = point_in_ball(n, rng, 0.999);
            asym = std::max(asym, std::abs(bergman_metric(x, y) - bergman_metric(y, x)));
            excess = std::max(excess, bergman_metric(x, z) - bergman_metric(x, y) - bergman_metric(y, z));
            rho_c = std::max(rho_c, pseudo_metric_rho(x, y) / (pseudo_metric_rho(x, z) + pseudo_metric_rho(z, y)));
        }
    }
    const double h1 = pseudo_metric_rho(CVector(2), CVector{0.3, cplx(0.0, 0.4)});
    const double h2 = pseudo_metric_rho(CVector{0.5}, CVector{cplx(0.0, 0.5)});
    out.detail << "asymmetry " << fmt(asym) << ", worst triangle excess " << fmt(excess) << ", rho(0,w) " << fmt(h1)
               << " (0.5), sqrt2 case " << fmt(h2) << ", quasi-triangle " << fmt(rho_c);
    out.require(asym == 0.0, "symmetry");
    out.require(excess <= 1e-12, "triangle");
    out.require(std::abs(h1 - 0.5) <= 1e-12, "rho(0,w) = |w|");
    out.require(std::abs(h2 - std::sqrt(2.0)) <= 1e-12, "sqrt 2 case");
    out.require(rho_c <= 5.0, "quasi-triangle <= 5");
}

void measures(Outcome& out) {
    double worst_z = 0.0;
    for (int n : {1, 2, 3}) {
        for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
            QuadSpec spec = QuadSpec{}.with_nodes(1000000).with_stream("acceptance-normalisation");
            spec.proposal_alpha = -0.75;
            const Estimate e = volume(Region::whole(n), alpha, spec);
            worst_z = std::max(worst_z, std::abs(e.real() - 1.0) / e.std_error);
        }
    }
    const double c1 = normalizing_constant(3, 0.0), c2 = normalizing_constant(1, 1.0), c3 = normalizing_constant(2, 0.5);
    const double cerr = std::max({std::abs(c1 - reference_c_alpha(3, 0.0)), std::abs(c2 - reference_c_alpha(1, 1.0)),
                                  std::abs(c3 - reference_c_alpha(2, 0.5)), std::abs(c1 - 1.0), std::abs(c2 - 2.0),
                                  std::abs(c3 - 1.875)});
    const double t = std::tanh(1.0);
    const Estimate tau = integrate([](const CVector&) { return 1.0; },
                                   Region::bergman_ball(BallPoint::origin(1), 1.0), Measure::invariant(),
                                   QuadSpec{}.with_nodes(200000).with_stream("acceptance-tau").with_strategy(Strategy::Rejection));
    const double tz = std::abs(tau.real() - t * t / (1 - t * t)) / tau.std_error;
    out.detail << "worst normalisation z " << fmt(worst_z) << ", c_alpha error " << fmt(cerr) << ", tau(D(0,1)) "
               << fmt(tau.real()) << " vs " << fmt(t * t / (1 - t * t)) << " (z " << fmt(tz) << ")";
    out.require(worst_z <= 3.0, "normalisation");
    out.require(cerr <= 1e-12, "c_alpha");
    out.require(tz <= 3.0, "tau volume");
}

void ball_windows(Outcome& out) {
    // disc closed form v_0(D(x,g)) = R^2 as a sanity check of the volumes used
    {
        const double x = 0.9, t = std::tanh(1.0);
        const double R = t * (1 - x * x) / (1 - t * t * x * x);
        const Estimate v = volume(Region::bergman_ball(BallPoint{x}, 1.0), 0.0,
                                  QuadSpec{}.with_nodes(100000).with_strategy(Strategy::Pushforward));
        out.detail << "disc check " << fmt(v.real()) << " vs " << fmt(R * R) << "; ";
        out.require(std::abs(v.real() - R * R) <= 4 * v.std_error, "disc volume closed form");
    }
    for (int n : {1, 2, 3}) {
        for (double gamma : {0.5, 1.0, 2.0}) {
            auto ratio = [&](double m) {
                const Estimate v = volume(Region::bergman_ball(BallPoint(m * CVector::basis(n, 0)), gamma), 0.0,
                                          QuadSpec{}.with_nodes(20000).with_strategy(Strategy::Pushforward));
                return v.real() / std::pow(1 - m * m, n + 1.0);
            };
            std::vector<double> r;
            for (double m : {0.0, 0.5, 0.9, 0.99}) r.push_back(ratio(m));
            const double w = *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
            // growth per decade of 1-|z| must shrink past the last modulus
            const double g_prev = r[3] / r[2], g_next = ratio(0.999) / r[3];
            const bool blowup = g_next > 1.0 && g_next >= g_prev;
            out.detail << "n=" << n << " g=" << gamma << " window " << fmt(w) << " decade growth " << fmt(g_prev)
                       << " -> " << fmt(g_next) << "; ";
            out.require(w <= 10.0 && !blowup, "volume window n=" + std::to_string(n) + " gamma=" + fmt(gamma));
        }
    }
    for (double gamma : {0.5, 1.0}) {
        ExperimentConfig cfg;
        cfg.comparability_gamma = gamma;
        cfg.gammas = {0.5};
        cfg.nodes = 2000;
        const Report rep = verify_measures(cfg);
        for (const auto& row : rep.rows()) {
            if (row.experiment.find("comparability") == std::string::npos) continue;
            out.detail << row.experiment << "(" << row.params << ") " << fmt(row.lhs) << "; ";
            // the windows are checked at gamma = 0.5; gamma = 1 is printed for reference
            if (gamma == 0.5) out.require(row.lhs <= 10.0, row.experiment + " " + row.params);
        }
    }
}

void jacobian(Outcome& out) {
    ExperimentConfig cfg;
    cfg.nodes = 40000;
    cfg.gammas = {0.5};
    const Report rep = verify_measures(cfg);
    double worst = 0.0;
    for (const auto& row : rep.select("pushforward-vs-rejection")) {
        worst = std::max(worst, std::abs(row.lhs - row.rhs) / std::hypot(row.lhs_se, row.rhs_se));
        out.require(row.pass, "pushforward vs rejection " + row.params);
    }
    double rel = 0.0;
    for (double alpha : {0.0, 1.0})
        for (double gamma : {0.5, 1.0})
            for (double x : {0.0, 0.5, 0.9}) {
                const Estimate v = volume(Region::bergman_ball(BallPoint{x}, gamma), alpha,
                                          QuadSpec{}.with_nodes(200000).with_stream("acceptance-grid"));
                rel = std::max(rel, std::abs(v.real() / reference_disc_volume(x, gamma, alpha, 1200) - 1.0));
            }
    out.detail << "worst combined z " << fmt(worst) << ", worst relative error against grid " << fmt(rel);
    out.require(rel <= 0.01, "grid oracle");
}

void projection(Outcome& out) {
    double worst = 0.0;
    for (int n : {1, 2}) {
        for (double alpha : {0.0, 1.0}) {
            // 2 - z_1 + 3 z_1 z_n^2 - i z_n^3 with exact value computed term by term
            auto poly = [n](const CVector& z) {
                return 2.0 - z[0] + 3.0 * z[0] * z[n - 1] * z[n - 1] - cplx(0, 1) * z[n - 1] * z[n - 1] * z[n - 1];
            };
            for (std::uint64_t i = 0; i < 20; ++i) {
                NodeRng rng(2024, 6, i);
                const CVector z = point_in_ball(n, rng, 0.5);
                const Estimate e = bergman_project(poly, alpha, z, QuadSpec{}.with_nodes(100000).with_stream("acc-proj"));
                worst = std::max(worst, std::abs(e.value - poly(z)) / e.std_error);
            }
        }
    }
    out.detail << "polynomials: worst z " << fmt(worst);
    out.require(worst <= 3.0, "polynomial reproduction");

    // Literal claim P(conj w_1) = 2/3 z_1 (n=1, alpha=0).
    double worst_claim = 0.0, worst_zero = 0.0, worst_moment = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i) {
        NodeRng rng(2024, 7, i);
        const CVector z = point_in_ball(1, rng, 0.5);
        const QuadSpec spec = QuadSpec{}.with_nodes(100000).with_stream("acc-anti");
        const Estimate e = bergman_project([](const CVector& w) { return std::conj(w[0]); }, 0.0, z, spec);
        worst_claim = std::max(worst_claim, std::abs(e.value - 2.0 / 3.0 * z[0]) / e.std_error);
        worst_zero = std::max(worst_zero, std::abs(e.value) / e.std_error);
        const Estimate m = bergman_project([](const CVector& w) { return w[0] * w.norm_sq(); }, 0.0, z, spec);
        worst_moment = std::max(worst_moment, std::abs(m.value - 2.0 / 3.0 * z[0]) / m.std_error);
    }
    out.detail << "; P(conj w1) against 2/3 z1: worst z " << fmt(worst_claim) << " (against 0: " << fmt(worst_zero)
               << "; P(w1|w|^2) against 2/3 z1: " << fmt(worst_moment) << ")";
    out.require(worst_claim <= 3.0, "P(conj w1) = 2/3 z1");
}

void kernel_estimates(Outcome& out) {
    const KernelConstant a = kernel_size_check(0.0, sample_pairs(1, 10000, 5));
    const KernelConstant b = kernel_size_check(0.0, sample_pairs(1, 20000, 6));
    const KernelConstant s = kernel_smoothness_check(0.0, sample_triples(1, 10000, 5), 4.0);
    const InnerNodes nodes = InnerNodes::draw(1, 1.0, 64, 5, stream_tag("acc-ball"));
    const KernelConstant bs = kernel_ball_smoothness_check(0.0, 1.0, sample_triples(1, 1000, 5), 4.0, nodes);
    const auto growth = smoothness_without_filter(1, 0.0, {1e-1, 1e-2, 1e-3, 1e-4});
    out.detail << "size " << fmt(a.constant) << " -> " << fmt(b.constant) << " (bound 9), smoothness " << fmt(s.constant)
               << ", ball smoothness " << fmt(bs.constant) << ", unfiltered " << fmt(growth.front()) << " -> "
               << fmt(growth.back());
    for (const auto kind : {VectorKernel::Tent, VectorKernel::Radial, VectorKernel::Grad, VectorKernel::InvGrad}) {
        const VectorKernelId id{kind, 0.0, 1.0, 2.0};
        const KernelConstant v = kernel_smoothness_check(id, sample_triples(1, 300, 5), 4.0, nodes);
        out.detail << ", " << id.label() << " " << fmt(v.constant);
        out.require(std::isfinite(v.constant) && v.evaluated > 0, id.label());
    }
    out.require(std::abs(b.constant / a.constant - 1.0) <= 0.2, "size stable under doubling");
    out.require(a.constant <= 9.0 + 1e-9, "size below 3^m");
    out.require(std::isfinite(s.constant) && s.evaluated > 0 && std::isfinite(bs.constant), "smoothness finite");
    out.require(std::is_sorted(growth.begin(), growth.end()) && growth.back() >= 1e3 * growth.front(),
                "negative control diverges");
}

void e_norms(Outcome& out) {
    const HoloFun f = HoloFun::kernel_power(BallPoint{cplx(0.6, 0.2)}, 2.0);
    const HoloFun fr = f.radial_derivative();
    const HoloFun fd = f.partial(0);
    const double gamma = 1.0, q = 2.0;
    const InnerNodes nodes = InnerNodes::draw(1, gamma, 20000, 9, stream_tag("acc-enorm"));
    // pointwise densities from closed forms; in one variable Rf = z f' and
    // |invariant gradient|^2 = (1-|x|^2)(|f'|^2 - |x f'|^2) = (1-|x|^2)^2 |f'|^2
    auto density = [&](VectorKernel k, const CVector& x) {
        const double g = 1.0 - x.norm_sq();
        switch (k) {
            case VectorKernel::Tent: return std::abs(f(x));
            case VectorKernel::Radial: return g * std::abs(fr(x));
            case VectorKernel::Grad: return g * std::abs(fd(x));
            case VectorKernel::InvGrad: return g * std::abs(fd(x));
        }
        return 0.0;
    };
    double worst = 0.0;
    for (const auto kind : {VectorKernel::Tent, VectorKernel::Radial, VectorKernel::Grad, VectorKernel::InvGrad}) {
        const VectorKernelId id{kind, 0.0, gamma, q};
        double w = 0.0;
        for (std::uint64_t i = 0; i < 100; ++i) {
            NodeRng rng(2024, 8, i);
            const CVector z = point_in_ball(1, rng, 0.95);
            double sum = 0.0;
            for (const auto& p : nodes.points) sum += nodes.weight * std::pow(density(kind, moebius_apply(BallPoint(z), p)), q);
            const double ref = std::pow(sum, 1.0 / q);
            w = std::max(w, std::abs(vector_kernel_apply(id, f, z, nodes) - ref) / ref);
        }
        out.detail << id.label() << " " << fmt(w) << "; ";
        worst = std::max(worst, w);
    }
    out.require(worst <= 0.02, "E-norm identity");
}

void equivalences(Outcome& out) {
    struct Sweep {
        FunctionalKind kind;
        std::vector<int> ks;
    };
    const Sweep sweeps[] = {
        {FunctionalKind::Maximal, {0}},      {FunctionalKind::MaximalK, {0, 1, 2}},
        {FunctionalKind::AreaRadial, {0}},   {FunctionalKind::AreaGrad, {0}},
        {FunctionalKind::AreaInvGrad, {0}},  {FunctionalKind::AreaRadialK, {0, 1, 2}},
        {FunctionalKind::Tent, {0}},         {FunctionalKind::HLMax, {0, 1, 2}},
    };
    std::size_t windows = 0, failed = 0;
    for (const auto& s : sweeps) {
        ExperimentConfig cfg;
        cfg.ps = {1.5, 2.0, 4.0};
        cfg.gammas = {0.5, 1.0};
        cfg.ks = s.ks;
        cfg.seed = 3;
        const Report rep = run_equivalence(cfg, s.kind);
        double worst = 0.0;
        for (const auto& row : rep.rows()) {
            if (row.experiment.starts_with("equivalence-window")) {
                ++windows;
                worst = std::max(worst, row.ratio);
                if (!row.pass) {
                    ++failed;
                    out.require(false, row.experiment + " " + row.params + " ratio " + fmt(row.ratio));
                }
            } else if (row.experiment.starts_with("equivalence-constant")) {
                out.require(row.pass, row.experiment + " " + row.params);
            }
        }
        out.detail << functional_name(s.kind) << " worst window " << fmt(worst) << "; ";
    }
    out.detail << failed << " of " << windows << " windows above 10";
}

void atoms(Outcome& out) {
    ExperimentConfig cfg;
    const AtomBatch batch{100, 2.0, 0.0, 0.05, 0.5, 1, 1};
    const Report rep = run_atoms(cfg, batch);
    for (const auto& row : rep.rows()) {
        out.detail << row.experiment << " " << fmt(row.lhs) << "; ";
        out.require(row.pass, row.experiment);
    }
    // support and mean rechecked here on the node sets
    double worst_mean = 0.0;
    std::size_t outside = 0;
    for (std::size_t i = 0; i < batch.count; ++i) {
        AtomOptions opt;
        opt.nodes = 1000;
        const Atom a = batch_atom(batch, i, opt);
        double m = 0.0;
        for (std::size_t j = 0; j < a.nodes.size(); ++j) {
            if (std::abs(1.0 - herm_inner(a.nodes[j].point, a.zeta)) >= a.r * a.r) ++outside;
            m += a.nodes[j].weight * a.values[j];
        }
        worst_mean = std::max(worst_mean, std::abs(m));
    }
    out.require(outside == 0 && worst_mean <= 1e-10, "independent support/mean recheck");
}

void weak_type(Outcome& out) {
    ExperimentConfig cfg;
    const Report rep = run_weak_type(cfg);
    for (const auto& row : rep.rows()) {
        out.detail << row.experiment << " " << fmt(row.lhs) << "; ";
        out.require(row.pass, row.experiment);
    }
    // the constant-function row must land on the largest grid point below 1
    const double expect = std::pow(10.0, -3.0 + 6.0 * 23.0 / 47.0);
    out.require(std::abs(rep.select("weak-type-constant").front().lhs - expect) <= 1e-12, "constant function");
}

void determinism(Outcome& out, const std::string& cli) {
    ExperimentConfig cfg;
    cfg.moduli = {0.0, 0.9};
    cfg.nodes = 300;
    cfg.gammas = {0.5};
    const std::string a = run_equivalence(cfg, FunctionalKind::AreaInvGrad).csv();
    cfg.threads = 4;
    const std::string b = run_equivalence(cfg, FunctionalKind::AreaInvGrad).csv();
    out.require(a == b, "thread count changes output");
    out.detail << "in-process rerun with 4 threads identical: " << (a == b ? "yes" : "no");
    if (cli.empty()) {
        out.require(false, "no CLI path given");
        return;
    }
    const std::string args = " equiv --functional tent --moduli 0,0.5,0.9 --nodes 500 --seed 17 > ";
    std::string files[2] = {"acceptance_run_a.csv", "acceptance_run_b.csv"};
    for (const auto& f : files) {
        const int rc = std::system((cli + args + f).c_str());
        out.require(rc != -1, "CLI launch");
    }
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const std::string x = slurp(files[0]), y = slurp(files[1]);
    out.detail << ", CLI runs " << x.size() << " bytes, identical: " << (x == y && !x.empty() ? "yes" : "no");
    out.require(!x.empty() && x == y, "CLI output differs");
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::pair<const char*, Criterion> criteria[] = {
        {"automorphism identities", automorphisms},
        {"metric identities", metrics},
        {"measure normalisation", measures},
        {"ball volume and comparability windows", ball_windows},
        {"pushforward jacobian", jacobian},
        {"projection reproduction", projection},
        {"kernel size and smoothness", kernel_estimates},
        {"vector-kernel norm identities", e_norms},
        {"norm-equivalence sweeps", equivalences},
        {"atom conditions and synthesis", atoms},
        {"weak-type profile", weak_type},
        {"determinism", [&](Outcome& o) { determinism(o, cli); }},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, run] : criteria) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            run(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << index++ << " " << name << ": " << (out.pass ? "PASS" : "FAIL") << " ("
                  << fmt(std::round(secs * 10) / 10) << " s) " << out.detail.str() << std::endl;
        if (!out.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
