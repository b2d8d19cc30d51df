#include "bergman/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bergman {

namespace {

bool lex_less(const CVector& a, const CVector& b) {
    for (int k = 0; k < a.dim(); ++k) {
        if (a[k].real() != b[k].real()) return a[k].real() < b[k].real();
        if (a[k].imag() != b[k].imag()) return a[k].imag() < b[k].imag();
    }
    return false;
}

// 1 - |phi_z(w)|^2 without cancellation.
double image_gap(const CVector& z, const CVector& w) {
    return (1.0 - z.norm_sq()) * (1.0 - w.norm_sq()) / std::norm(1.0 - herm_inner(w, z));
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

bool FunctionalSelector::is_supremum() const {
    return kind == FunctionalKind::Maximal || kind == FunctionalKind::MaximalK || kind == FunctionalKind::TentSup;
}

std::string FunctionalSelector::label() const {
    std::string name;
    switch (kind) {
        case FunctionalKind::Maximal: name = "maximal"; break;
        case FunctionalKind::MaximalK: name = "maximal-k"; break;
        case FunctionalKind::AreaRadial: name = "area-radial"; break;
        case FunctionalKind::AreaGrad: name = "area-grad"; break;
        case FunctionalKind::AreaInvGrad: name = "area-invgrad"; break;
        case FunctionalKind::Tent: name = "tent"; break;
        case FunctionalKind::TentSup: name = "tent-sup"; break;
        case FunctionalKind::HLMax: name = "hlmax"; break;
        case FunctionalKind::AreaRadialK: name = "area-radial-k"; break;
    }
    std::string out = name + "(gamma=" + fmt(gamma);
    if (!is_supremum()) out += ",q=" + fmt(q);
    if (kind == FunctionalKind::MaximalK || kind == FunctionalKind::AreaRadialK || kind == FunctionalKind::HLMax)
        out += ",k=" + std::to_string(k);
    if (kind == FunctionalKind::HLMax) out += ",alpha=" + fmt(alpha);
    return out + ")";
}

void FunctionalSelector::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("functional: gamma must be positive");
    if (k < 0) throw std::invalid_argument("functional: k must be nonnegative");
    if (kind == FunctionalKind::HLMax) {
        if (!(q > 0.0)) throw std::invalid_argument("functional: q must be positive");
        if (!(alpha > -1.0)) throw std::invalid_argument("functional: alpha must exceed -1");
    } else if (!is_supremum() && !(q > 1.0 && std::isfinite(q))) {
        throw std::invalid_argument("functional: q must lie in (1, inf)");
    }
}

InnerNodes InnerNodes::draw(int n, double gamma, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
    if (count == 0) throw std::invalid_argument("InnerNodes: count must be positive");
    InnerNodes nodes;
    nodes.gamma = gamma;
    nodes.points = invariant_ball_nodes(n, gamma, count, seed, stream);
    nodes.weight = invariant_ball_volume(n, gamma) / static_cast<double>(count);
    return nodes;
}

// ---------------------------------------------------------------------------
// Functionals

FunctionalEvaluator::FunctionalEvaluator(const FunctionalSelector& sel, const HoloFun& f, const FunctionalOptions& opt)
    : FunctionalEvaluator(sel, f, InnerNodes::draw(f.dim(), sel.gamma, opt.inner_nodes, opt.seed, opt.stream), opt) {}

FunctionalEvaluator::FunctionalEvaluator(const FunctionalSelector& sel, const HoloFun& f, InnerNodes nodes,
                                         const FunctionalOptions& opt)
    : sel_(sel), opt_(opt), n_(f.dim()), radius_(std::tanh(sel.gamma)), f_(f), derived_(f), inner_(std::move(nodes)) {
    sel_.validate();
    if (inner_.gamma < sel_.gamma) throw std::invalid_argument("FunctionalEvaluator: node set smaller than the ball");
    switch (sel_.kind) {
        case FunctionalKind::MaximalK:
        case FunctionalKind::AreaRadialK:
        case FunctionalKind::HLMax: derived_ = f.radial_derivative(sel_.k); break;
        case FunctionalKind::AreaRadial: derived_ = f.radial_derivative(1); break;
        case FunctionalKind::AreaGrad: grad_.emplace(f); break;
        case FunctionalKind::AreaInvGrad:
            if (!opt_.numeric_invariant_gradient) grad_.emplace(f);
            break;
        default: break;
    }
    if (sel_.kind == FunctionalKind::HLMax) {
        centers_ = invariant_ball_nodes(n_, sel_.gamma, opt_.hl_centers, opt_.seed, opt_.stream ^ stream_tag("hl-centers"));
    }
}

double FunctionalEvaluator::density(const CVector& w) const {
    const double gap = 1.0 - w.norm_sq();
    switch (sel_.kind) {
        case FunctionalKind::Maximal:
        case FunctionalKind::TentSup:
        case FunctionalKind::Tent: return std::abs(f_(w));
        case FunctionalKind::AreaRadial: return gap * std::abs(derived_(w));
        case FunctionalKind::MaximalK:
        case FunctionalKind::AreaRadialK:
        case FunctionalKind::HLMax: return std::pow(gap, sel_.k) * std::abs(derived_(w));
        case FunctionalKind::AreaGrad: return gap * (*grad_)(w).norm();
        case FunctionalKind::AreaInvGrad:
            if (opt_.numeric_invariant_gradient) return invariant_gradient(f_, w).norm();
            return invariant_gradient_exact((*grad_)(w), w).norm();
    }
    return 0.0;
}

double FunctionalEvaluator::supremum(const CVector& z) const {
    const Automorphism phi{BallPoint(z)};
    double best = density(z);
    CVector best_pre(n_);
    for (const auto& w : inner_.points) {
        if (!(w.norm() < radius_)) continue;
        const double v = density(phi.apply(w));
        if (v > best) {
            best = v;
            best_pre = w;
        }
    }
    // Coordinate pattern search from the best node, staying inside D(0, gamma).
    const double inside = radius_ * (1.0 - 1e-12);
    for (int level = 0; level < opt_.ascent_levels; ++level) {
        const double step = 0.25 * radius_ * std::ldexp(1.0, -level);
        for (int k = 0; k < n_; ++k) {
            for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
                CVector cand = best_pre;
                cand[k] += step * dir;
                // slide along the boundary sphere rather than stopping at it
                const double len = cand.norm();
                if (!(len < inside)) cand = (inside / len) * cand;
                const double v = density(phi.apply(cand));
                if (v > best) {
                    best = v;
                    best_pre = cand;
                }
            }
        }
    }
    return best;
}

double FunctionalEvaluator::average(const CVector& z) const {
    const Automorphism phi{BallPoint(z)};
    std::vector<double> terms;
    terms.reserve(inner_.points.size());
    for (const auto& w : inner_.points) {
        if (!(w.norm() < radius_)) continue;
        terms.push_back(std::pow(density(phi.apply(w)), sel_.q));
    }
    return std::pow(inner_.weight * pairwise_sum(std::span<const double>(terms)), 1.0 / sel_.q);
}

double FunctionalEvaluator::hl_max(const CVector& z) const {
    const double m = n_ + 1.0 + sel_.alpha;
    const std::size_t inner = std::min(opt_.hl_inner, inner_.points.size());
    const Automorphism around_z{BallPoint(z)};
    double best = 0.0;
    auto ball_average = [&](const CVector& w) {
        const Automorphism phi{BallPoint(w)};
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < inner; ++i) {
            const CVector& pre = inner_.points[i];
            if (!(pre.norm() < radius_)) continue;
            // dv_alpha / dtau = c (1-|u|^2)^(n+1+alpha); c cancels in the ratio
            const double rho = std::pow(image_gap(w, pre), m);
            num += rho * std::pow(density(phi.apply(pre)), sel_.q);
            den += rho;
        }
        return den > 0.0 ? num / den : 0.0;
    };
    best = ball_average(z);
    for (const auto& c : centers_) {
        if (!(c.norm() < radius_)) continue;
        best = std::max(best, ball_average(around_z.apply(c)));
    }
    return std::pow(best, 1.0 / sel_.q);
}

double FunctionalEvaluator::operator()(const CVector& z) const {
    if (sel_.is_supremum()) return supremum(z);
    if (sel_.kind == FunctionalKind::HLMax) return hl_max(z);
    return average(z);
}

double apply_functional(const FunctionalSelector& sel, const HoloFun& f, const CVector& z,
                        const FunctionalOptions& opt) {
    return FunctionalEvaluator(sel, f, opt)(z);
}

// ---------------------------------------------------------------------------
// Bergman kernel

cplx bergman_kernel(double alpha, const CVector& z, const CVector& w) {
    if (z.dim() != w.dim()) throw std::invalid_argument("bergman_kernel: dimension mismatch");
    const double m = z.dim() + 1.0 + alpha;
    if (lex_less(w, z)) return std::conj(bergman_kernel(alpha, w, z));
    return std::exp(-m * std::log(1.0 - herm_inner(z, w)));
}

Estimate bergman_project(const ScalarField& f, double alpha, const CVector& z, const QuadSpec& spec) {
    if (!(alpha > -1.0)) throw std::invalid_argument("bergman_project: alpha must exceed -1");
    return integrate([&](const CVector& w) { return bergman_kernel(alpha, z, w) * f(w); }, Region::whole(z.dim()),
                     Measure::weighted(alpha), spec);
}

// ---------------------------------------------------------------------------
// Vector kernels

std::string VectorKernelId::label() const {
    const char* names[] = {"tent", "radial", "grad", "invgrad"};
    return std::string(names[static_cast<int>(kind)]) + "(alpha=" + fmt(alpha) + ",gamma=" + fmt(gamma) +
           ",q=" + fmt(q) + ")";
}

CVector kernel_value(const VectorKernelId& id, const CVector& z, const CVector& u, const CVector& w) {
    const int n = z.dim();
    const double m = n + 1.0 + id.alpha;
    const CVector x = Automorphism(BallPoint(z)).apply(w);
    const double gap = image_gap(z, w);
    const cplx ip = herm_inner(x, u);
    const cplx lg = std::log(1.0 - ip);
    switch (id.kind) {
        case VectorKernel::Tent: return CVector{std::exp(-m * lg)};
        case VectorKernel::Radial: return CVector{m * gap * ip * std::exp(-(m + 1.0) * lg)};
        case VectorKernel::Grad: {
            const cplx s = m * gap * std::exp(-(m + 1.0) * lg);
            CVector out(n);
            for (int k = 0; k < n; ++k) out[k] = s * std::conj(u[k]);
            return out;
        }
        case VectorKernel::InvGrad: {
            const CVector y = Automorphism(BallPoint(x)).apply(u);
            const double s = m * std::pow(gap / std::norm(1.0 - ip), m);
            CVector out(n);
            for (int k = 0; k < n; ++k) out[k] = s * std::conj(y[k]);
            return out;
        }
    }
    throw std::logic_error("kernel_value: unknown kernel");
}

namespace {

class FiberEval {
public:
    FiberEval(const VectorKernelId& id, const HoloFun& f) : id_(id), f_(f), radial_(f.radial_derivative()), grad_(f) {}

    CVector operator()(const CVector& x, double gap) const {
        switch (id_.kind) {
            case VectorKernel::Tent: return CVector{f_(x)};
            case VectorKernel::Radial: return CVector{gap * radial_(x)};
            case VectorKernel::Grad: return gap * grad_(x);
            case VectorKernel::InvGrad: return invariant_gradient_exact(grad_(x), x);
        }
        return CVector(1);
    }

private:
    VectorKernelId id_;
    HoloFun f_;
    HoloFun radial_;
    GradientField grad_;
};

double e_norm(const InnerNodes& nodes, double gamma, double q, const std::function<double(const CVector&)>& mag) {
    const double radius = std::tanh(gamma);
    std::vector<double> terms;
    terms.reserve(nodes.points.size());
    for (const auto& w : nodes.points) {
        if (!(w.norm() < radius)) continue;
        terms.push_back(std::pow(mag(w), q));
    }
    return std::pow(nodes.weight * pairwise_sum(std::span<const double>(terms)), 1.0 / q);
}

}  // namespace

CVector kernel_fiber(const VectorKernelId& id, const HoloFun& f, const CVector& z, const CVector& w) {
    const CVector x = Automorphism(BallPoint(z)).apply(w);
    return FiberEval(id, f)(x, image_gap(z, w));
}

std::vector<Estimate> kernel_fiber_by_integration(const VectorKernelId& id, const HoloFun& f, const CVector& z,
                                                  const CVector& w, const QuadSpec& spec) {
    const int comps = kernel_value(id, z, CVector(z.dim()), w).dim();
    std::vector<Estimate> out;
    for (int j = 0; j < comps; ++j) {
        out.push_back(integrate([&](const CVector& u) { return kernel_value(id, z, u, w)[j] * f(u); },
                                Region::whole(z.dim()), Measure::weighted(id.alpha), spec));
    }
    return out;
}

double vector_kernel_apply(const VectorKernelId& id, const HoloFun& f, const CVector& z, const InnerNodes& nodes) {
    if (nodes.gamma < id.gamma) throw std::invalid_argument("vector_kernel_apply: node set smaller than the ball");
    const FiberEval fiber(id, f);
    const Automorphism phi{BallPoint(z)};
    return e_norm(nodes, id.gamma, id.q, [&](const CVector& w) { return fiber(phi.apply(w), image_gap(z, w)).norm(); });
}

double kernel_e_norm(const VectorKernelId& id, const CVector& z, const CVector& u, const InnerNodes& nodes) {
    return e_norm(nodes, id.gamma, id.q, [&](const CVector& w) { return kernel_value(id, z, u, w).norm(); });
}

double kernel_e_norm_difference(const VectorKernelId& id, const CVector& z1, const CVector& u1, const CVector& z2,
                                const CVector& u2, const InnerNodes& nodes) {
    return e_norm(nodes, id.gamma, id.q,
                  [&](const CVector& w) { return (kernel_value(id, z1, u1, w) - kernel_value(id, z2, u2, w)).norm(); });
}

// ---------------------------------------------------------------------------
// Kernel estimate checks

namespace {

CVector uniform_point(int n, NodeRng& rng) {
    const CVector dir = random_direction(n, rng);
    return std::min(std::pow(rng.uniform(), 1.0 / (2.0 * n)), 1.0 - 1e-9) * dir;
}

CVector nearby(const CVector& center, NodeRng& rng) {
    const double t = 1e-3 * std::pow(900.0, rng.uniform());  // log-uniform in [1e-3, 0.9]
    const CVector dir = random_direction(center.dim(), rng);
    return Automorphism(BallPoint(center)).apply(t * dir);
}

}  // namespace

std::vector<PointPair> sample_pairs(int n, std::size_t count, std::uint64_t seed) {
    std::vector<PointPair> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        NodeRng rng(seed, stream_tag("pairs"), i);
        out[i].z = uniform_point(n, rng);
        out[i].u = rng.uniform() < 0.5 ? uniform_point(n, rng) : nearby(out[i].z, rng);
    }
    return out;
}

std::vector<PointTriple> sample_triples(int n, std::size_t count, std::uint64_t seed) {
    std::vector<PointTriple> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        NodeRng rng(seed, stream_tag("triples"), i);
        out[i].zeta = uniform_point(n, rng);
        out[i].u = nearby(out[i].zeta, rng);
        out[i].z = uniform_point(n, rng);
    }
    return out;
}

KernelConstant kernel_size_check(double alpha, const std::vector<PointPair>& pairs) {
    KernelConstant res;
    for (const auto& p : pairs) {
        const double r = pseudo_metric_rho(p.z, p.u);
        if (r == 0.0) {
            ++res.skipped;
            continue;
        }
        const double m = p.z.dim() + 1.0 + alpha;
        res.constant = std::max(res.constant, std::abs(bergman_kernel(alpha, p.z, p.u)) * std::pow(r, m));
        ++res.evaluated;
    }
    return res;
}

KernelConstant kernel_size_check(const VectorKernelId& id, const std::vector<PointPair>& pairs, const InnerNodes& nodes) {
    KernelConstant res;
    for (const auto& p : pairs) {
        const double r = pseudo_metric_rho(p.z, p.u);
        if (r == 0.0) {
            ++res.skipped;
            continue;
        }
        const double m = p.z.dim() + 1.0 + id.alpha;
        res.constant = std::max(res.constant, kernel_e_norm(id, p.z, p.u, nodes) * std::pow(r, m));
        ++res.evaluated;
    }
    return res;
}

namespace {

template <class Diff>
KernelConstant smoothness(double alpha, const std::vector<PointTriple>& triples, double c1, Diff&& diff) {
    KernelConstant res;
    for (const auto& t : triples) {
        const double far = pseudo_metric_rho(t.z, t.zeta);
        const double near = pseudo_metric_rho(t.u, t.zeta);
        if (near == 0.0 || (c1 > 0.0 && !(far > c1 * near))) {
            ++res.skipped;
            continue;
        }
        const double m = t.z.dim() + 1.0 + alpha;
        const double v = diff(t) * std::pow(far, m + 0.5) / std::sqrt(near);
        res.constant = std::max(res.constant, v);
        ++res.evaluated;
    }
    return res;
}

}  // namespace

KernelConstant kernel_smoothness_check(double alpha, const std::vector<PointTriple>& triples, double c1) {
    return smoothness(alpha, triples, c1, [&](const PointTriple& t) {
        return std::abs(bergman_kernel(alpha, t.z, t.u) - bergman_kernel(alpha, t.z, t.zeta)) +
               std::abs(bergman_kernel(alpha, t.u, t.z) - bergman_kernel(alpha, t.zeta, t.z));
    });
}

KernelConstant kernel_smoothness_check(const VectorKernelId& id, const std::vector<PointTriple>& triples, double c1,
                                       const InnerNodes& nodes) {
    return smoothness(id.alpha, triples, c1, [&](const PointTriple& t) {
        return kernel_e_norm_difference(id, t.z, t.u, t.z, t.zeta, nodes) +
               kernel_e_norm_difference(id, t.u, t.z, t.zeta, t.z, nodes);
    });
}

KernelConstant kernel_ball_smoothness_check(double alpha, double gamma, const std::vector<PointTriple>& triples,
                                            double c1, const InnerNodes& nodes) {
    const double radius = std::tanh(gamma);
    return smoothness(alpha, triples, c1, [&](const PointTriple& t) {
        const Automorphism phi{BallPoint(t.z)};
        double best = std::abs(bergman_kernel(alpha, t.z, t.u) - bergman_kernel(alpha, t.z, t.zeta));
        for (const auto& pre : nodes.points) {
            if (!(pre.norm() < radius)) continue;
            const CVector w = phi.apply(pre);
            best = std::max(best, std::abs(bergman_kernel(alpha, w, t.u) - bergman_kernel(alpha, w, t.zeta)));
        }
        return best;
    });
}

std::vector<double> smoothness_without_filter(int n, double alpha, const std::vector<double>& etas, double theta) {
    std::vector<double> out;
    for (double eta : etas) {
        CVector z(n), zeta(n);
        z[0] = 1.0 - eta;
        zeta[0] = std::polar(1.0 - eta, theta);
        const std::vector<PointTriple> one{{z, z, zeta}};
        out.push_back(kernel_smoothness_check(alpha, one, 0.0).constant);
    }
    return out;
}

}  // namespace bergman
