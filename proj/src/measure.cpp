#include "bergman/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace bergman {

double normalizing_constant(int n, double alpha) {
    if (alpha <= -1.0) return 1.0;
    const double num = n + alpha + 1.0;
    if (num < 170.0) return std::tgamma(num) / (std::tgamma(n + 1.0) * std::tgamma(alpha + 1.0));
    return std::exp(std::lgamma(num) - std::lgamma(n + 1.0) - std::lgamma(alpha + 1.0));
}

double density(const Measure& mu, const CVector& z) { return mu.density_from_gap(z.dim(), 1.0 - z.norm_sq()); }

// ---------------------------------------------------------------------------
// RadialLaw

namespace {

// Smallest gap handed out by samplers; keeps every node a valid BallPoint.
constexpr double kMinGap = 4e-14;

bool is_invariant_exponent(int n, double a) { return a == -(n + 1.0); }

}  // namespace

RadialLaw::RadialLaw(int n, double a, double limit) : n_(n), a_(a), limit_(limit) {
    if (n < 1) throw std::invalid_argument("RadialLaw: n must be >= 1");
    if (!(limit > 0.0 && limit <= 1.0)) throw std::invalid_argument("RadialLaw: limit must lie in (0, 1]");
    if (is_invariant_exponent(n, a)) {
        if (limit >= 1.0) throw std::invalid_argument("RadialLaw: the invariant measure of the ball is infinite");
        mass_ = std::pow(limit / (1.0 - limit), n);
        return;
    }
    if (!(a > -1.0)) throw std::invalid_argument("RadialLaw: exponent must be > -1 or equal -(n+1)");
    const double b = a + 1.0;
    tail_coeffs_.resize(n);
    tail_coeffs_[0] = 1.0;
    for (int j = 1; j < n; ++j) tail_coeffs_[j] = tail_coeffs_[j - 1] * (b + j - 1.0) / j;
    const double full = 1.0 / normalizing_constant(n, a);
    mass_ = limit >= 1.0 ? full : full * boost::math::ibeta(static_cast<double>(n), b, limit);
    tail_at_limit_ = limit >= 1.0 ? 0.0 : tail(1.0 - limit);
}

double RadialLaw::tail(double gap) const {
    const double t = 1.0 - gap;
    double poly = 0.0;
    for (int j = n_ - 1; j >= 0; --j) poly = poly * t + tail_coeffs_[j];
    return std::pow(gap, a_ + 1.0) * poly;
}

double RadialLaw::sample_gap(double v) const {
    if (is_invariant_exponent(n_, a_)) {
        const double s_max = limit_ / (1.0 - limit_);
        const double s = s_max * std::pow(v, 1.0 / n_);
        return 1.0 / (1.0 + s);
    }
    const double b = a_ + 1.0;
    const double target = tail_at_limit_ + v * (1.0 - tail_at_limit_);
    if (n_ == 1) return std::max(std::pow(target, 1.0 / b), kMinGap);

    // Bracketed Newton on the tail, which increases in the gap.
    const double cn = n_ * normalizing_constant(n_, a_);
    double lo = 1.0 - limit_;
    double hi = 1.0;
    double y = std::clamp(std::pow(target, 1.0 / b), lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double g = tail(y) - target;
        if (g > 0.0) hi = y;
        else lo = y;
        const double slope = cn * std::pow(1.0 - y, n_ - 1) * std::pow(y, a_);
        double next = (slope > 0.0 && std::isfinite(slope)) ? y - g / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - y) <= 1e-15 * y) {
            y = next;
            break;
        }
        y = next;
    }
    return std::max(y, kMinGap);
}

CVector random_direction(int n, NodeRng& rng) {
    CVector d(n);
    double s = 0.0;
    do {
        for (int k = 0; k < n; ++k) d[k] = cplx(rng.normal(), rng.normal());
        s = d.norm();
    } while (s == 0.0);
    d *= 1.0 / s;
    return d;
}

// ---------------------------------------------------------------------------
// Samplers

namespace {

double proposal_exponent(const Measure& mu, int n, const QuadSpec& spec) {
    if (spec.proposal_alpha) return *spec.proposal_alpha;
    const double a = mu.exponent(n);
    return a > -1.0 ? a : 0.0;
}

// Whole-ball (or centred Euclidean ball) sampling by the radial law, optionally
// restricted to a region through its indicator.
class RadialSampler final : public NodeSampler {
public:
    RadialSampler(const Region& region, const Measure& mu, double proposal, double limit, const QuadSpec& spec,
                  bool restrict)
        : region_(region), mu_(mu), law_(region.dim(), proposal, limit), seed_(spec.seed), stream_(spec.stream),
          restrict_(restrict) {
        const int n = region.dim();
        same_law_ = mu.exponent(n) == proposal;
        const_weight_ = mu.constant(n) * law_.mass();
    }

    int dim() const override { return law_.dim(); }

    Node node(std::uint64_t index) const override {
        NodeRng rng(seed_, stream_, index);
        const int n = dim();
        const CVector dir = random_direction(n, rng);
        const double gap = law_.sample_gap(rng.uniform());
        Node nd{std::sqrt(1.0 - gap) * dir, gap, 0.0};
        if (restrict_ && !region_.contains(nd.point)) return nd;
        nd.weight = same_law_ ? const_weight_
                              : mu_.density_from_gap(n, gap) * law_.mass() / std::pow(gap, law_.exponent());
        return nd;
    }

private:
    Region region_;
    Measure mu_;
    RadialLaw law_;
    std::uint64_t seed_, stream_;
    bool restrict_;
    bool same_law_ = false;
    double const_weight_ = 0.0;
};

class PushforwardSampler final : public NodeSampler {
public:
    PushforwardSampler(const BergmanBall& ball, const Measure& mu, const QuadSpec& spec)
        : phi_(ball.center), mu_(mu), law_(ball.center.dim(), -(ball.center.dim() + 1.0), std::pow(std::tanh(ball.gamma), 2)),
          seed_(spec.seed), stream_(spec.stream) {
        const int n = dim();
        center_gap_ = 1.0 - ball.center.norm_sq();
        shift_ = mu.exponent(n) + n + 1.0;
        scale_ = law_.mass() * mu.constant(n);
    }

    int dim() const override { return law_.dim(); }

    Node node(std::uint64_t index) const override {
        NodeRng rng(seed_, stream_, index);
        const CVector dir = random_direction(dim(), rng);
        const double y = law_.sample_gap(rng.uniform());
        const CVector w = std::sqrt(1.0 - y) * dir;
        const double gap = center_gap_ * y / std::norm(1.0 - herm_inner(w, phi_.base().coords()));
        // tau is Moebius invariant, so d mu = c (1-|u|^2)^(a+n+1) d tau at u = phi(w).
        const double weight = shift_ == 0.0 ? scale_ : scale_ * std::pow(gap, shift_);
        return {phi_.apply(w), gap, weight};
    }

private:
    Automorphism phi_;
    Measure mu_;
    RadialLaw law_;
    std::uint64_t seed_, stream_;
    double center_gap_ = 1.0;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

// Builds a unitary frame whose first vector is zeta.
std::vector<CVector> unitary_frame(const CVector& zeta) {
    const int n = zeta.dim();
    std::vector<CVector> frame{zeta};
    for (int k = 0; k < n && static_cast<int>(frame.size()) < n; ++k) {
        CVector v = CVector::basis(n, k);
        for (const auto& e : frame) v -= herm_inner(v, e) * e;
        const double len = v.norm();
        if (len > 1e-6) frame.push_back((1.0 / len) * v);
    }
    return frame;
}

// Carleson tube Q_r(zeta) = {|1 - <z,zeta>| < r^2}. Writing z = x zeta + z_perp,
// x = sqrt(t) e^{i theta} is drawn from (1-t)^beta on t in [(1-r^2)^2, 1) and
// |theta| < asin(r^2), which bounds the tube; z_perp / sqrt(1-|x|^2) follows
// v_alpha on B_{n-1}. Points outside the tube are rejected.
class TubeSampler final : public NodeSampler {
public:
    TubeSampler(const CarlesonTube& tube, const Measure& mu, double proposal, const QuadSpec& spec)
        : region_(tube), mu_(mu), frame_(unitary_frame(tube.zeta)), proposal_(proposal), seed_(spec.seed),
          stream_(spec.stream) {
        const int n = tube.zeta.dim();
        if (!(proposal > -1.0)) throw std::invalid_argument("TubeSampler: proposal exponent must be > -1");
        const double r2 = tube.r * tube.r;
        t0_ = r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0;
        theta_max_ = r2 < 1.0 ? std::asin(r2) : std::numbers::pi;
        beta_ = n - 1.0 + proposal;
        if (n > 1) perp_law_.emplace(n - 1, proposal, 1.0);
        const double cn = normalizing_constant(n, proposal);
        const double cn1 = n > 1 ? normalizing_constant(n - 1, proposal) : 1.0;
        base_weight_ = cn * n / (std::numbers::pi * cn1) * theta_max_ * std::pow(1.0 - t0_, beta_ + 1.0) / (beta_ + 1.0);
        // base_weight_ integrates against v_proposal; convert to mu below.
        base_weight_ /= cn;
        same_law_ = mu.exponent(n) == proposal;
    }

    int dim() const override { return static_cast<int>(frame_.size()); }

    Node node(std::uint64_t index) const override {
        NodeRng rng(seed_, stream_, index);
        const int n = dim();
        const double gap_x = (1.0 - t0_) * std::pow(rng.uniform(), 1.0 / (beta_ + 1.0));
        const double theta = theta_max_ * (2.0 * rng.uniform() - 1.0);
        const cplx x = std::polar(std::sqrt(1.0 - gap_x), theta);
        CVector z = x * frame_[0];
        double gap = gap_x;
        if (n > 1) {
            const CVector dir = random_direction(n - 1, rng);
            const double yg = perp_law_->sample_gap(rng.uniform());
            const double scale = std::sqrt(gap_x) * std::sqrt(1.0 - yg);
            for (int j = 1; j < n; ++j) z += (scale * dir[j - 1]) * frame_[j];
            gap = gap_x * yg;
        }
        Node nd{z, std::max(gap, kMinGap), 0.0};
        if (!is_interior(nd.point) || !region_.contains(nd.point)) return nd;
        // density of v_proposal relative to the sampling law is base_weight_ * c_p (1-|z|^2)^p / (...); the
        // (1-|z|^2)^p factor is built into the law, so only the target/proposal ratio remains.
        const double ratio = same_law_ ? mu_.constant(n)
                                       : mu_.density_from_gap(n, nd.gap) / std::pow(nd.gap, proposal_);
        nd.weight = base_weight_ * ratio;
        return nd;
    }

private:
    Region region_;
    Measure mu_;
    std::vector<CVector> frame_;
    double proposal_;
    std::uint64_t seed_, stream_;
    double t0_ = 0.0, theta_max_ = 0.0, beta_ = 0.0, base_weight_ = 0.0;
    bool same_law_ = false;
    std::optional<RadialLaw> perp_law_;
};

class RejectionSampler final : public NodeSampler {
public:
    RejectionSampler(const Region& region, const Measure& mu, const QuadSpec& spec)
        : region_(region), mu_(mu), box_(region.bounding_ball()), seed_(spec.seed), stream_(spec.stream) {
        box_volume_ = std::pow(box_.radius, 2 * region.dim());
    }

    int dim() const override { return region_.dim(); }

    Node node(std::uint64_t index) const override {
        NodeRng rng(seed_, stream_, index);
        const int n = dim();
        const CVector dir = random_direction(n, rng);
        const double rad = box_.radius * std::pow(rng.uniform(), 1.0 / (2.0 * n));
        Node nd{box_.center + rad * dir, 0.0, 0.0};
        nd.gap = 1.0 - nd.point.norm_sq();
        if (!is_interior(nd.point) || !region_.contains(nd.point)) return nd;
        nd.weight = box_volume_ * mu_.density_from_gap(n, nd.gap);
        return nd;
    }

private:
    Region region_;
    Measure mu_;
    EuclideanBall box_;
    std::uint64_t seed_, stream_;
    double box_volume_ = 1.0;
};

// Balance-heuristic mixture: with probability 1/2 a draw from v_p, otherwise a
// draw from v_p transported by phi_a for a pole a chosen uniformly. Weights use
// the full mixture density, so they never exceed 2 dmu/dv_p.
class PoleMixtureSampler final : public NodeSampler {
public:
    PoleMixtureSampler(const Region& region, const Measure& mu, double proposal, const QuadSpec& spec)
        : region_(region), mu_(mu), law_(region.dim(), proposal, 1.0), proposal_(proposal),
          c_p_(normalizing_constant(region.dim(), proposal)), seed_(spec.seed), stream_(spec.stream) {
        if (spec.poles.empty()) throw std::invalid_argument("PoleMixture: at least one pole is required");
        for (const auto& p : spec.poles) {
            if (p.dim() != region.dim()) throw std::invalid_argument("PoleMixture: pole dimension mismatch");
            poles_.emplace_back(BallPoint(p));
        }
        restrict_ = !std::holds_alternative<WholeBall>(region.variant());
    }

    int dim() const override { return law_.dim(); }

    Node node(std::uint64_t index) const override {
        NodeRng rng(seed_, stream_, index);
        const int n = dim();
        const double pick = rng.uniform();
        const CVector dir = random_direction(n, rng);
        const double y = law_.sample_gap(rng.uniform());
        const CVector w = std::sqrt(1.0 - y) * dir;
        Node nd;
        if (pick < 0.5) {
            nd.point = w;
            nd.gap = y;
        } else {
            const auto j = std::min<std::size_t>(static_cast<std::size_t>((pick - 0.5) * 2.0 * poles_.size()),
                                                 poles_.size() - 1);
            const Automorphism& phi = poles_[j];
            nd.point = phi.apply(w);
            nd.gap = (1.0 - phi.base().norm_sq()) * y / std::norm(1.0 - herm_inner(w, phi.base().coords()));
        }
        nd.gap = std::max(nd.gap, kMinGap);
        if (!is_interior(nd.point) || (restrict_ && !region_.contains(nd.point))) return nd;

        double transported = 0.0;
        for (const auto& phi : poles_) {
            const double a_gap = 1.0 - phi.base().norm_sq();
            const double ratio = a_gap / std::norm(1.0 - herm_inner(nd.point, phi.base().coords()));
            transported += std::pow(ratio * nd.gap, proposal_) * std::pow(ratio, n + 1);
        }
        const double q = 0.5 * c_p_ * (std::pow(nd.gap, proposal_) + transported / poles_.size());
        nd.weight = mu_.density_from_gap(n, nd.gap) / q;
        return nd;
    }

private:
    Region region_;
    Measure mu_;
    RadialLaw law_;
    double proposal_;
    double c_p_;
    std::vector<Automorphism> poles_;
    std::uint64_t seed_, stream_;
    bool restrict_ = false;
};

}  // namespace

std::unique_ptr<NodeSampler> make_sampler(const Region& region, const Measure& mu, const QuadSpec& spec) {
    const int n = region.dim();
    Strategy strategy = spec.strategy;
    if (strategy == Strategy::Auto) {
        strategy = std::visit(
            [&](const auto& r) -> Strategy {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, WholeBall>) return Strategy::UniformBall;
                else if constexpr (std::is_same_v<T, BergmanBall>) return Strategy::Pushforward;
                else if constexpr (std::is_same_v<T, CarlesonTube>) return Strategy::TubeRejection;
                else return r.center.norm_sq() == 0.0 && r.radius < 1.0 ? Strategy::UniformBall : Strategy::Rejection;
            },
            region.variant());
    }

    switch (strategy) {
        case Strategy::UniformBall: {
            double limit = 1.0;
            if (const auto* e = std::get_if<EuclideanBall>(&region.variant()); e && e->center.norm_sq() == 0.0)
                limit = std::min(1.0, e->radius * e->radius);
            double proposal = proposal_exponent(mu, n, spec);
            if (limit < 1.0 && !spec.proposal_alpha && is_invariant_exponent(n, mu.exponent(n)))
                proposal = mu.exponent(n);
            const bool restrict = !std::holds_alternative<WholeBall>(region.variant());
            if (!mu.is_probability() && limit >= 1.0 && !(proposal > -1.0))
                throw std::invalid_argument("integrate: this measure needs a proposal exponent > -1");
            return std::make_unique<RadialSampler>(region, mu, proposal, limit, spec, restrict);
        }
        case Strategy::Pushforward: {
            const auto* b = std::get_if<BergmanBall>(&region.variant());
            if (!b) throw std::invalid_argument("Pushforward sampling needs a BergmanBall region");
            return std::make_unique<PushforwardSampler>(*b, mu, spec);
        }
        case Strategy::TubeRejection: {
            const auto* t = std::get_if<CarlesonTube>(&region.variant());
            if (!t) throw std::invalid_argument("Tube sampling needs a CarlesonTube region");
            return std::make_unique<TubeSampler>(*t, mu, proposal_exponent(mu, n, spec), spec);
        }
        case Strategy::Rejection:
            return std::make_unique<RejectionSampler>(region, mu, spec);
        case Strategy::PoleMixture:
            return std::make_unique<PoleMixtureSampler>(region, mu, proposal_exponent(mu, n, spec), spec);
        case Strategy::Auto:
            break;
    }
    throw std::logic_error("make_sampler: unhandled strategy");
}

Estimate summarize(std::span<const cplx> y) {
    Estimate e;
    e.nodes = y.size();
    if (y.empty()) {
        e.valid = false;
        return e;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i].real()) || !std::isfinite(y[i].imag())) {
            e.valid = false;
            e.bad_index = i;
            e.value = cplx(std::nan(""), std::nan(""));
            e.std_error = std::nan("");
            return e;
        }
    }
    const double count = static_cast<double>(y.size());
    e.value = pairwise_sum(y) / count;
    std::vector<double> dev(y.size());
    std::vector<double> mag(y.size());
    double biggest = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        dev[i] = std::norm(y[i] - e.value);
        mag[i] = std::abs(y[i]);
        biggest = std::max(biggest, mag[i]);
    }
    const double total = pairwise_sum(std::span<const double>(mag));
    e.std_error = y.size() > 1 ? std::sqrt(pairwise_sum(std::span<const double>(dev)) / (count - 1.0) / count) : 0.0;
    e.max_share = total > 0.0 ? biggest / total : 0.0;
    e.heavy_tail = y.size() >= 1000 && e.max_share > 0.05;
    return e;
}

std::vector<Node> materialize(const NodeSampler& sampler, std::size_t count, unsigned threads) {
    std::vector<Node> nodes(count);
    parallel_for(count, threads, [&](std::size_t i) { nodes[i] = sampler.node(i); });
    return nodes;
}

Estimate volume(const Region& region, double alpha, const QuadSpec& spec) {
    return integrate([](const CVector&) { return 1.0; }, region, Measure::weighted(alpha), spec);
}

double invariant_ball_volume(int n, double gamma) { return std::pow(std::sinh(gamma), 2 * n); }

std::vector<CVector> invariant_ball_nodes(int n, double gamma, std::size_t count, std::uint64_t seed,
                                          std::uint64_t stream) {
    const RadialLaw law(n, -(n + 1.0), std::pow(std::tanh(gamma), 2));
    std::vector<CVector> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        NodeRng rng(seed, stream, i);
        const CVector dir = random_direction(n, rng);
        out[i] = std::sqrt(1.0 - law.sample_gap(rng.uniform())) * dir;
    }
    return out;
}

DoublingReport doubling_check(BallMetric metric, int n, double alpha, std::size_t balls, double r_min, double r_max,
                              const QuadSpec& spec) {
    if (!(alpha > -1.0)) throw std::invalid_argument("doubling_check: alpha must be > -1");
    DoublingReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    const Measure mu = Measure::weighted(alpha);
    std::vector<Node> shared;
    if (metric == BallMetric::Rho) {
        const auto sampler = make_sampler(Region::whole(n), mu, spec.with_stream("doubling-nodes"));
        shared = materialize(*sampler, spec.node_count, spec.threads);
    }
    for (std::size_t b = 0; b < balls; ++b) {
        NodeRng rng(spec.seed, spec.stream ^ stream_tag("doubling-balls"), b);
        const CVector dir = random_direction(n, rng);
        const CVector x = std::pow(rng.uniform(), 1.0 / (2.0 * n)) * std::min(1.0, 1.0 - 1e-6) * dir;
        const double r = r_min * std::pow(r_max / r_min, rng.uniform());
        double small = 0.0, big = 0.0;
        if (metric == BallMetric::Rho) {
            for (const auto& nd : shared) {
                const double d = pseudo_metric_rho(x, nd.point);
                if (d < 2.0 * r) big += nd.weight;
                if (d < r) small += nd.weight;
            }
        } else {
            const BallPoint c(x);
            const QuadSpec s = spec.with_stream("doubling-pushforward").with_nodes(spec.node_count / 10 + 1);
            small = volume(Region::bergman_ball(c, r), alpha, s).real();
            big = volume(Region::bergman_ball(c, 2.0 * r), alpha, s).real();
        }
        if (small <= 0.0) {
            ++rep.skipped;
            continue;
        }
        const double ratio = big / small;
        rep.constant = std::max(rep.constant, ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        ++rep.evaluated;
    }
    return rep;
}

}  // namespace bergman
