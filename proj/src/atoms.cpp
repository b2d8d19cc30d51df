#include "bergman/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bergman/operators.hpp"
#include "json.hpp"

namespace bergman {

using nlohmann::json;

Atom Atom::constant_one(int n, double q, double alpha) {
    Atom a;
    a.zeta = CVector::basis(n, 0);
    a.r = std::sqrt(2.0);  // the tube of radius sqrt 2 is the whole ball
    a.q = q;
    a.alpha = alpha;
    a.exceptional = true;
    a.scale = 1.0;
    a.volume.value = 1.0;
    return a;
}

int Atom::cell(const CVector& z) const {
    const cplx d = 1.0 - herm_inner(z, zeta);
    const double theta = std::arg(d);  // in (-pi/2, pi/2) on the ball
    const int sector = std::clamp(static_cast<int>((theta / std::numbers::pi + 0.5) * 4.0), 0, 3);
    const int shell = std::abs(d) < 0.5 * r * r ? 0 : 1;
    return 2 * sector + shell;
}

double Atom::operator()(const CVector& z) const {
    if (exceptional) return 1.0;
    if (degenerate || !tube().contains(z)) return 0.0;
    return scale * (signs[cell(z)] - mean);
}

double Atom::node_mean() const {
    if (exceptional) return 1.0;
    std::vector<double> t(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) t[i] = nodes[i].weight * values[i];
    return pairwise_sum(std::span<const double>(t));
}

double Atom::node_lq_norm() const {
    if (exceptional) return 1.0;
    std::vector<double> t(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) t[i] = nodes[i].weight * std::pow(std::abs(values[i]), q);
    return std::pow(pairwise_sum(std::span<const double>(t)), 1.0 / q);
}

double Atom::node_l1_norm() const {
    if (exceptional) return 1.0;
    std::vector<double> t(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) t[i] = nodes[i].weight * std::abs(values[i]);
    return pairwise_sum(std::span<const double>(t));
}

double Atom::size_bound() const { return std::pow(volume.real(), 1.0 / q - 1.0); }

Atom make_atom(const CVector& zeta_in, double r, double q, double alpha, std::uint64_t seed, const AtomOptions& opt) {
    if (!(r > 0.0)) throw std::invalid_argument("make_atom: r must be positive");
    if (!(q > 1.0)) throw std::invalid_argument("make_atom: q must exceed 1");
    if (!(alpha > -1.0)) throw std::invalid_argument("make_atom: alpha must exceed -1");
    const double len = zeta_in.norm();
    if (!(len > 0.0)) throw std::invalid_argument("make_atom: zeta must be nonzero");

    Atom a;
    a.zeta = (1.0 / len) * zeta_in;
    a.r = r;
    a.q = q;
    a.alpha = alpha;

    QuadSpec spec;
    spec.seed = seed;
    spec.stream = stream_tag("atom-nodes");
    const auto sampler = make_sampler(a.tube(), Measure::weighted(alpha), spec);
    const double count = static_cast<double>(opt.nodes);
    const std::vector<Node> drawn = materialize(*sampler, opt.nodes);
    std::vector<cplx> raw(drawn.size());
    for (std::size_t i = 0; i < drawn.size(); ++i) {
        raw[i] = drawn[i].weight;
        if (drawn[i].weight == 0.0) continue;
        Node kept = drawn[i];
        kept.weight /= count;
        a.nodes.push_back(kept);
    }
    a.volume = summarize(raw);

    // Cells present in the node set; a sign pattern constant across them is degenerate.
    std::array<bool, kAtomCells> present{};
    std::vector<int> cells(a.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        cells[i] = a.cell(a.nodes[i].point);
        present[cells[i]] = true;
    }
    auto constant_on_nodes = [&](const std::array<int, kAtomCells>& s) {
        int seen = 0;
        for (int c = 0; c < kAtomCells; ++c) {
            if (!present[c]) continue;
            if (seen != 0 && s[c] != seen) return false;
            seen = s[c];
        }
        return true;
    };
    if (opt.signs) {
        a.signs = *opt.signs;
    } else {
        for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
            NodeRng rng(seed, stream_tag("atom-signs"), attempt);
            for (int& s : a.signs) s = rng.uniform() < 0.5 ? -1 : 1;
            if (!constant_on_nodes(a.signs)) break;
        }
    }
    a.degenerate = a.nodes.empty() || constant_on_nodes(a.signs);

    a.values.assign(a.nodes.size(), 0.0);
    if (a.degenerate) return a;

    double wsum = 0.0, gsum = 0.0;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        wsum += a.nodes[i].weight;
        gsum += a.nodes[i].weight * a.signs[cells[i]];
    }
    a.mean = gsum / wsum;
    double lq = 0.0;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        a.values[i] = a.signs[cells[i]] - a.mean;
        lq += a.nodes[i].weight * std::pow(std::abs(a.values[i]), q);
    }
    a.scale = a.size_bound() / std::pow(lq, 1.0 / q);
    for (double& v : a.values) v *= a.scale;
    return a;
}

cplx atom_project(const Atom& a, double alpha, const CVector& z) {
    // P_alpha reproduces constants
    if (a.exceptional) return 1.0;
    if (a.degenerate) return 0.0;
    const int n = z.dim();
    const bool reweight = alpha != a.alpha;
    const double c_ratio = reweight ? normalizing_constant(n, alpha) / normalizing_constant(n, a.alpha) : 1.0;
    std::vector<cplx> t(a.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        double w = a.nodes[i].weight;
        if (reweight) w *= c_ratio * std::pow(a.nodes[i].gap, alpha - a.alpha);
        t[i] = w * a.values[i] * bergman_kernel(alpha, z, a.nodes[i].point);
    }
    return pairwise_sum(std::span<const cplx>(t));
}

Estimate projected_l1_norm(const Atom& a, double alpha, const QuadSpec& spec) {
    const int n = a.zeta.dim();
    QuadSpec outer = spec;
    if (outer.strategy == Strategy::Auto && !a.exceptional) {
        outer.strategy = Strategy::PoleMixture;
        outer.poles = {(1.0 - a.r * a.r) * a.zeta};
    }
    return integrate([&](const CVector& z) { return std::abs(atom_project(a, alpha, z)); }, Region::whole(n),
                     Measure::weighted(alpha), outer);
}

// ---------------------------------------------------------------------------
// Lattices and synthesis

Lattice build_lattice(int n, double separation, std::size_t count_limit, std::uint64_t seed, int strata) {
    if (!(separation > 0.0)) throw std::invalid_argument("build_lattice: separation must be positive");
    if (strata < 0) throw std::invalid_argument("build_lattice: strata must be nonnegative");
    Lattice lat;
    lat.separation = separation;
    std::vector<CVector> candidates{CVector(n)};
    for (int j = 1; j <= strata; ++j) {
        const double radius = 1.0 - std::ldexp(1.0, -j);
        // Enough candidates to cover the sphere at scale `separation`.
        const auto per_stratum = static_cast<std::size_t>(std::ceil(16.0 * std::pow(2.0, j * n)));
        for (std::size_t i = 0; i < per_stratum; ++i) {
            NodeRng rng(seed, stream_tag("lattice") ^ static_cast<std::uint64_t>(j), i);
            candidates.push_back(radius * random_direction(n, rng));
        }
    }
    for (const auto& c : candidates) {
        if (lat.points.size() >= count_limit) break;
        bool far = true;
        for (const auto& p : lat.points) {
            if (bergman_metric(c, p) < separation) {
                far = false;
                break;
            }
        }
        if (far) lat.points.push_back(c);
    }
    return lat;
}

double synthesis_exponent_bound(int n, double p, double alpha) {
    return n * std::max(1.0, 1.0 / p) + (alpha + 1.0) / p;
}

HoloFun cr_synthesize(const Lattice& lattice, const std::vector<cplx>& coeffs, double b, double p, double alpha) {
    if (lattice.points.empty()) throw std::invalid_argument("cr_synthesize: empty lattice");
    if (coeffs.size() != lattice.points.size()) throw std::invalid_argument("cr_synthesize: coefficient count mismatch");
    if (!(p > 0.0) || !(alpha > -1.0)) throw std::invalid_argument("cr_synthesize: need p > 0 and alpha > -1");
    const int n = lattice.points.front().dim();
    if (!(b > synthesis_exponent_bound(n, p, alpha)))
        throw std::invalid_argument("cr_synthesize: b must exceed n max(1,1/p) + (alpha+1)/p");
    const double e = (p * b - n - 1.0 - alpha) / p;
    HoloFun f(n);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const CVector& a = lattice.points[k];
        f += HoloFun::kernel_power(BallPoint(a), b, coeffs[k] * std::pow(1.0 - a.norm_sq(), e));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Batches

void AtomBatch::validate() const {
    if (count == 0) throw std::invalid_argument("atom batch: count must be positive");
    if (!(q > 1.0)) throw std::invalid_argument("atom batch: q must exceed 1");
    if (!(alpha > -1.0)) throw std::invalid_argument("atom batch: alpha must exceed -1");
    if (!(r_min > 0.0 && r_min <= r_max && r_max <= std::sqrt(2.0)))
        throw std::invalid_argument("atom batch: r_range must satisfy 0 < r_min <= r_max <= sqrt 2");
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("atom batch: n out of range");
}

AtomBatch atom_batch_from_json(const std::string& text) {
    AtomBatch b;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("atom batch: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("atom batch: expected an object");
    try {
        if (j.contains("count")) b.count = j.at("count").get<std::size_t>();
        if (j.contains("q")) b.q = j.at("q").get<double>();
        if (j.contains("alpha")) b.alpha = j.at("alpha").get<double>();
        if (j.contains("seed")) b.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("n")) b.n = j.at("n").get<int>();
        if (j.contains("r_range")) {
            const auto& r = j.at("r_range");
            if (!r.is_array() || r.size() != 2) throw std::invalid_argument("atom batch: r_range must be [min, max]");
            b.r_min = r[0].get<double>();
            b.r_max = r[1].get<double>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("atom batch: ") + e.what());
    }
    b.validate();
    return b;
}

std::string to_json(const AtomBatch& b) {
    json j = {{"count", b.count}, {"q", b.q},         {"alpha", b.alpha},
              {"r_range", {b.r_min, b.r_max}}, {"seed", b.seed}, {"n", b.n}};
    return j.dump();
}

Atom batch_atom(const AtomBatch& batch, std::size_t i, const AtomOptions& opt) {
    NodeRng rng(batch.seed, stream_tag("atom-batch"), i);
    const CVector zeta = random_direction(batch.n, rng);
    const double r = batch.r_min * std::pow(batch.r_max / batch.r_min, rng.uniform());
    return make_atom(zeta, r, batch.q, batch.alpha, batch.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)), opt);
}

}  // namespace bergman
