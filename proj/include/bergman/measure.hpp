#pragma once

// Weighted measures on the ball and seeded Monte-Carlo quadrature over regions.
//
// All densities are relative to Lebesgue measure dv normalised so that
// v(B_n) = 1. Every estimate is produced from a node stream that is a pure
// function of (seed, stream, node index), and contributions are reduced with
// a fixed pairwise tree, so results do not depend on the worker count.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "bergman/ball_geometry.hpp"
#include "bergman/parallel.hpp"
#include "bergman/rng.hpp"

namespace bergman {

/// c_alpha = Gamma(n+alpha+1) / (n! Gamma(alpha+1)) for alpha > -1, and 1 otherwise.
double normalizing_constant(int n, double alpha);

/// dv_alpha = c_alpha (1-|z|^2)^alpha dv, or the invariant measure
/// dtau = (1-|z|^2)^-(n+1) dv.
struct Measure {
    enum class Kind { Weighted, Invariant };
    Kind kind = Kind::Weighted;
    double alpha = 0.0;

    static Measure weighted(double alpha) { return {Kind::Weighted, alpha}; }
    static Measure invariant() { return {Kind::Invariant, 0.0}; }

    double exponent(int n) const { return kind == Kind::Invariant ? -(n + 1.0) : alpha; }
    double constant(int n) const { return kind == Kind::Invariant ? 1.0 : normalizing_constant(n, alpha); }
    /// Density given the gap 1 - |z|^2.
    double density_from_gap(int n, double gap) const { return constant(n) * std::pow(gap, exponent(n)); }
    bool is_probability() const { return kind == Kind::Weighted && alpha > -1.0; }
};

double density(const Measure& mu, const CVector& z);

enum class Strategy {
    Auto,           ///< per-region default below
    UniformBall,    ///< radial inverse-CDF sampling of the whole ball (default for WholeBall)
    Pushforward,    ///< D(0,gamma) mapped through phi_center (default for BergmanBall)
    TubeRejection,  ///< bounding cap around a Carleson tube (default for CarlesonTube)
    Rejection,      ///< uniform in the region's bounding Euclidean ball
    PoleMixture,    ///< whole-ball law mixed with Moebius-transported copies centred at poles
};

struct QuadSpec {
    std::size_t node_count = 200000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    Strategy strategy = Strategy::Auto;
    /// Exponent of the whole-ball sampling law v_beta (beta > -1); defaults to the target's.
    std::optional<double> proposal_alpha;
    /// Pole locations for Strategy::PoleMixture.
    std::vector<CVector> poles;
    unsigned threads = 1;

    QuadSpec with_nodes(std::size_t n) const {
        QuadSpec s = *this;
        s.node_count = n;
        return s;
    }
    QuadSpec with_stream(std::string_view name) const {
        QuadSpec s = *this;
        s.stream = stream ^ stream_tag(name);
        return s;
    }
    QuadSpec with_strategy(Strategy st) const {
        QuadSpec s = *this;
        s.strategy = st;
        return s;
    }
};

/// Monte-Carlo estimate of a (possibly complex) integral.
struct Estimate {
    cplx value{};
    double std_error = 0.0;
    std::size_t nodes = 0;
    bool valid = true;
    /// Index of the first node whose contribution was not finite.
    std::optional<std::size_t> bad_index;
    /// Largest single |contribution| as a share of sum |contribution|.
    double max_share = 0.0;
    /// Set when one node dominates the sum, a sign of an unbounded integrand.
    bool heavy_tail = false;

    double real() const { return value.real(); }
};

/// A quadrature node. weight == 0 marks a rejected proposal.
struct Node {
    CVector point;
    double gap = 1.0;  ///< 1 - |point|^2, computed without cancellation where possible
    double weight = 0.0;
};

/// Law of t = |z|^2 for the measure (1-|z|^2)^a dv restricted to |z|^2 < limit,
/// with z uniform in direction. Supports a > -1 (any limit) and the invariant
/// exponent a = -(n+1) (limit < 1).
class RadialLaw {
public:
    RadialLaw(int n, double a, double limit = 1.0);

    /// Maps v uniform on (0,1) to the gap 1 - t.
    double sample_gap(double v) const;
    /// Integral of (1-|z|^2)^a dv over |z|^2 < limit.
    double mass() const { return mass_; }
    int dim() const { return n_; }
    double exponent() const { return a_; }
    double limit() const { return limit_; }

private:
    double tail(double gap) const;  // 1 - I_t(n, a+1) written in the gap y = 1 - t

    int n_;
    double a_;
    double limit_;
    double mass_;
    double tail_at_limit_ = 0.0;
    std::vector<double> tail_coeffs_;
};

/// Draws a uniformly distributed unit vector in C^n.
CVector random_direction(int n, NodeRng& rng);

class NodeSampler {
public:
    virtual ~NodeSampler() = default;
    virtual int dim() const = 0;
    virtual Node node(std::uint64_t index) const = 0;
};

std::unique_ptr<NodeSampler> make_sampler(const Region& region, const Measure& mu, const QuadSpec& spec);

/// Reduces per-node contributions y_i into mean and standard error.
Estimate summarize(std::span<const cplx> contributions);

template <class F>
Estimate integrate_with(F&& f, const NodeSampler& sampler, std::size_t count, unsigned threads) {
    std::vector<cplx> y(count);
    parallel_for(count, threads, [&](std::size_t i) {
        const Node nd = sampler.node(i);
        y[i] = nd.weight == 0.0 ? cplx{} : nd.weight * cplx(f(nd.point));
    });
    return summarize(y);
}

/// Unbiased estimate of the integral of f over `region` against `mu`.
template <class F>
Estimate integrate(F&& f, const Region& region, const Measure& mu, const QuadSpec& spec) {
    const auto sampler = make_sampler(region, mu, spec);
    return integrate_with(f, *sampler, spec.node_count, spec.threads);
}

std::vector<Node> materialize(const NodeSampler& sampler, std::size_t count, unsigned threads = 1);

/// Integral of g over D(center, gamma): nodes of D(0, gamma) pushed through phi_center.
template <class F>
Estimate pushforward_bergman_ball(F&& g, const BallPoint& center, double gamma, const Measure& mu,
                                  const QuadSpec& spec) {
    return integrate(g, Region::bergman_ball(center, gamma), mu, spec.with_strategy(Strategy::Pushforward));
}

/// v_alpha(region).
Estimate volume(const Region& region, double alpha, const QuadSpec& spec);

/// tau(D(0, gamma)) = sinh(gamma)^(2n).
double invariant_ball_volume(int n, double gamma);

/// Points of D(0, gamma) distributed as tau restricted to the ball; each carries
/// weight invariant_ball_volume / count.
std::vector<CVector> invariant_ball_nodes(int n, double gamma, std::size_t count, std::uint64_t seed,
                                          std::uint64_t stream);

enum class BallMetric { Rho, Bergman };

struct DoublingReport {
    double constant = 0.0;  ///< max ratio mu(B(x,2r)) / mu(B(x,r))
    double min_ratio = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  ///< balls with zero estimated mass
};

/// Empirical doubling constant of v_alpha for balls of the chosen metric. Ball
/// centres come from v_0, radii are log-uniform in [r_min, r_max]; masses are
/// estimated on one shared v_alpha node set.
DoublingReport doubling_check(BallMetric metric, int n, double alpha, std::size_t balls, double r_min, double r_max,
                              const QuadSpec& spec);

}  // namespace bergman
