#include "bergman/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace bergman {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ReportRow make_row(std::string experiment, std::string params, double lhs, double lhs_se, double rhs, double rhs_se,
                   double ratio, bool pass) {
    return {std::move(experiment), std::move(params), lhs, lhs_se, rhs, rhs_se, ratio, pass};
}

// Row for an exact check: pass iff |lhs - rhs| <= tol max(1, |rhs|).
ReportRow exact_row(std::string experiment, std::string params, double lhs, double rhs, double tol) {
    const bool pass = std::abs(lhs - rhs) <= tol * std::max(1.0, std::abs(rhs));
    return make_row(std::move(experiment), std::move(params), lhs, 0.0, rhs, 0.0, rhs != 0.0 ? lhs / rhs : kInf, pass);
}

// Row for "lhs must not exceed rhs".
ReportRow bound_row(std::string experiment, std::string params, double lhs, double rhs) {
    const double ratio = rhs != 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : kInf);
    return make_row(std::move(experiment), std::move(params), lhs, 0.0, rhs, 0.0, ratio, lhs <= rhs);
}

class Params {
public:
    Params() = default;
    explicit Params(std::string prefix) : text_(std::move(prefix)) {}
    Params& add(std::string_view key, double v) { return add(key, format_number(v)); }
    Params& add(std::string_view key, int v) { return add(key, std::to_string(v)); }
    Params& add(std::string_view key, std::size_t v) { return add(key, std::to_string(v)); }
    Params& add(std::string_view key, std::string_view v) {
        if (!text_.empty()) text_ += ';';
        text_ += key;
        text_ += '=';
        text_ += v;
        return *this;
    }
    operator std::string() const { return text_; }

private:
    std::string text_;
};

CVector random_in_ball(int n, NodeRng& rng, double max_norm) {
    const CVector dir = random_direction(n, rng);
    return (max_norm * std::pow(rng.uniform(), 1.0 / (2.0 * n))) * dir;
}

double window_of(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

std::size_t or_default(std::size_t v, std::size_t fallback) { return v == 0 ? fallback : v; }

}  // namespace

// ---------------------------------------------------------------------------
// Reports

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void Report::append(const Report& other) { rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end()); }

bool Report::all_pass() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const ReportRow& r) { return r.pass; });
}

std::vector<ReportRow> Report::select(std::string_view prefix) const {
    std::vector<ReportRow> out;
    for (const auto& r : rows_)
        if (std::string_view(r.experiment).starts_with(prefix)) out.push_back(r);
    return out;
}

std::string Report::csv() const {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows_) {
        out += r.experiment + ',' + r.params + ',' + format_number(r.lhs) + ',' + format_number(r.lhs_se) + ',' +
               format_number(r.rhs) + ',' + format_number(r.rhs_se) + ',' + format_number(r.ratio) + ',' +
               (r.pass ? "true" : "false") + '\n';
    }
    return out;
}

std::string Report::json() const {
    auto num = [](double x) -> ordered_json {
        if (std::isfinite(x)) return x;
        return format_number(x);
    };
    ordered_json rows = ordered_json::array();
    for (const auto& r : rows_) {
        rows.push_back({{"experiment", r.experiment},
                        {"params", r.params},
                        {"lhs", num(r.lhs)},
                        {"lhs_se", num(r.lhs_se)},
                        {"rhs", num(r.rhs)},
                        {"rhs_se", num(r.rhs_se)},
                        {"ratio", num(r.ratio)},
                        {"pass", r.pass}});
    }
    ordered_json doc = {{"columns", ordered_json::array({"experiment", "params", "lhs", "lhs_se", "rhs", "rhs_se",
                                                         "ratio", "pass"})},
                        {"rows", rows},
                        {"all_pass", all_pass()}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (dims.empty()) fail("dims must not be empty");
    for (int d : dims)
        if (d < 1 || d > kMaxDim) fail("dimension out of range");
    if (n < 1 || n > kMaxDim) fail("n out of range");
    if (!std::isfinite(alpha)) fail("alpha must be finite");
    for (double g : gammas)
        if (!(g > 0.0)) fail("gamma must be positive");
    if (ps.empty()) fail("p list must not be empty");
    for (double p : ps)
        if (!(p > 0.0 && std::isfinite(p))) fail("p must be positive and finite");
    if (!(q > 0.0 && std::isfinite(q))) fail("q must be positive and finite");
    if (ks.empty()) fail("k list must not be empty");
    for (int k : ks)
        if (k < 0) fail("k must be nonnegative");
    if (b && !(*b > 0.0)) fail("b must be positive");
    if (moduli.empty()) fail("moduli must not be empty");
    for (double m : moduli)
        if (!(m >= 0.0 && m < 1.0)) fail("moduli must lie in [0, 1)");
    if (trials == 0) fail("trials must be positive");
    if (tol && !(*tol > 0.0)) fail("tol must be positive");
    if (!(window >= 1.0)) fail("window must be at least 1");
    if (radii.empty()) fail("radii must not be empty");
    for (double r : radii)
        if (!(r > 0.0 && r <= std::sqrt(2.0))) fail("radii must lie in (0, sqrt 2]");
    if (count == 0) fail("count must be positive");
    if (!(r_min > 0.0 && r_min <= r_max && r_max <= std::sqrt(2.0))) fail("r_range must satisfy 0 < min <= max <= sqrt 2");
    if (!(comparability_gamma > 0.0)) fail("comparability_gamma must be positive");
    if (threads == 0) fail("threads must be positive");
}

namespace {

template <class T>
std::vector<T> scalar_or_list(const ordered_json& v) {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
}

}  // namespace

void ExperimentConfig::apply_json(const std::string& text) {
    // Edits land on a copy so a rejected config leaves *this untouched.
    ExperimentConfig c = *this;
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "dims") c.dims = scalar_or_list<int>(v);
            else if (key == "n") c.n = v.get<int>();
            else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "gamma") c.gammas = scalar_or_list<double>(v);
            else if (key == "p") c.ps = scalar_or_list<double>(v);
            else if (key == "q") c.q = v.get<double>();
            else if (key == "k") c.ks = scalar_or_list<int>(v);
            else if (key == "b") c.b = v.is_null() ? std::optional<double>{} : v.get<double>();
            else if (key == "moduli") c.moduli = scalar_or_list<double>(v);
            else if (key == "nodes") c.nodes = v.get<std::size_t>();
            else if (key == "inner_nodes") c.inner_nodes = v.get<std::size_t>();
            else if (key == "trials") c.trials = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "tol") c.tol = v.is_null() ? std::optional<double>{} : v.get<double>();
            else if (key == "window") c.window = v.get<double>();
            else if (key == "radii") c.radii = scalar_or_list<double>(v);
            else if (key == "count") c.count = v.get<std::size_t>();
            else if (key == "r_range") {
                const auto r = v.get<std::vector<double>>();
                if (r.size() != 2) throw std::invalid_argument("config: r_range must be [min, max]");
                c.r_min = r[0];
                c.r_max = r[1];
            } else if (key == "comparability_gamma") c.comparability_gamma = v.get<double>();
            else if (key == "threads") c.threads = v.get<unsigned>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.validate();
    *this = std::move(c);
}

std::string ExperimentConfig::to_json() const {
    ordered_json j = {{"dims", dims},   {"n", n},         {"alpha", alpha},   {"gamma", gammas},
                      {"p", ps},        {"q", q},         {"k", ks},          {"moduli", moduli},
                      {"nodes", nodes}, {"inner_nodes", inner_nodes},         {"trials", trials},
                      {"seed", seed},   {"window", window}, {"radii", radii}, {"count", count},
                      {"r_range", {r_min, r_max}}, {"comparability_gamma", comparability_gamma},
                      {"threads", threads}};
    j["b"] = b ? ordered_json(*b) : ordered_json();
    j["tol"] = tol ? ordered_json(*tol) : ordered_json();
    return j.dump();
}

// ---------------------------------------------------------------------------
// Geometry

Report verify_geometry(const ExperimentConfig& cfg) {
    cfg.validate();
    Report rep;
    const double tol_exact = cfg.tol.value_or(1e-12);
    const double tol_round = cfg.tol.value_or(1e-10);
    const std::size_t triples = 10 * cfg.trials;

    for (int n : cfg.dims) {
        double origin = 0.0, swap = 0.0, inv = 0.0, ident = 0.0;
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            NodeRng rng(cfg.seed, stream_tag("verify-moebius") ^ static_cast<std::uint64_t>(n), i);
            const CVector z = random_in_ball(n, rng, 0.99);
            const CVector w = random_in_ball(n, rng, 0.99);
            const Automorphism phi{BallPoint(z)};
            origin = std::max(origin, (phi.apply(CVector(n)) - z).norm());
            swap = std::max(swap, phi.apply(z).norm());
            const CVector image = phi.apply(w);
            inv = std::max(inv, (phi.apply(image) - w).norm());
            const double direct = 1.0 - image.norm_sq();
            const double formula = (1.0 - z.norm_sq()) * (1.0 - w.norm_sq()) / std::norm(1.0 - herm_inner(z, w));
            ident = std::max(ident, std::abs(direct - formula) / direct);
        }
        const std::string p = Params().add("n", n).add("trials", cfg.trials).add("max_modulus", 0.99);
        rep.add(bound_row("moebius-origin", p, origin, tol_exact));
        rep.add(bound_row("moebius-swap", p, swap, tol_exact));
        rep.add(bound_row("moebius-involution", p, inv, tol_round));
        rep.add(bound_row("moebius-gap-identity", p, ident, tol_round));

        double asym = 0.0, excess = -kInf, rho_c = 0.0, d_c = 0.0;
        for (std::size_t i = 0; i < triples; ++i) {
            NodeRng rng(cfg.seed, stream_tag("verify-metrics") ^ static_cast<std::uint64_t>(n), i);
            const CVector x = random_in_ball(n, rng, 0.999);
            const CVector y = random_in_ball(n, rng, 0.999);
            const CVector z = random_in_ball(n, rng, 0.999);
            asym = std::max(asym, std::abs(bergman_metric(x, y) - bergman_metric(y, x)));
            excess = std::max(excess, bergman_metric(x, z) - bergman_metric(x, y) - bergman_metric(y, z));
            const double via = pseudo_metric_rho(x, z) + pseudo_metric_rho(z, y);
            if (via > 0.0) rho_c = std::max(rho_c, pseudo_metric_rho(x, y) / via);
            // d on the closed ball: push a quarter of the samples to the sphere
            const CVector xs = i % 4 == 0 ? (1.0 / x.norm()) * x : x;
            const CVector ys = i % 4 == 1 ? (1.0 / y.norm()) * y : y;
            const double dvia = noniso_metric_d(xs, z) + noniso_metric_d(z, ys);
            if (dvia > 0.0) d_c = std::max(d_c, noniso_metric_d(xs, ys) / dvia);
        }
        const std::string pt = Params().add("n", n).add("triples", triples);
        rep.add(bound_row("beta-symmetry", pt, asym, 0.0));
        rep.add(bound_row("beta-triangle-excess", pt, excess, tol_exact));
        rep.add(bound_row("rho-quasi-triangle-constant", pt, rho_c, 5.0));
        rep.add(make_row("d-quasi-triangle-constant", pt, d_c, 0.0, kInf, 0.0, 0.0, std::isfinite(d_c)));
    }

    const std::string p1 = Params().add("n", 1);
    rep.add(exact_row("moebius-hand-value", p1, moebius_apply(BallPoint{0.5}, CVector{-0.5})[0].real(), 0.8, tol_exact));
    rep.add(exact_row("beta-hand-value", p1, bergman_metric(CVector{0.0}, CVector{0.5}), 0.5 * std::log(3.0), tol_exact));
    rep.add(exact_row("rho-hand-value-origin", Params().add("n", 2),
                      pseudo_metric_rho(CVector(2), CVector{0.3, cplx(0, 0.4)}), 0.5, tol_exact));
    rep.add(exact_row("rho-hand-value-orthogonal", p1, pseudo_metric_rho(CVector{0.5}, CVector{cplx(0, 0.5)}),
                      std::sqrt(2.0), tol_exact));
    rep.add(exact_row("d-hand-value", p1, noniso_metric_d(CVector{0.5}, CVector{1.0}), std::sqrt(0.5), tol_exact));
    rep.add(exact_row("bergman-ball-contains", Params().add("n", 2).add("gamma", 1.0),
                      Region::bergman_ball(BallPoint::origin(2), 1.0).contains(CVector{0.5, 0.0}) ? 1.0 : 0.0, 1.0,
                      0.0));
    rep.add(exact_row("tube-excludes-boundary-distance", Params().add("n", 2).add("r", 1.0),
                      Region::tube(CVector::basis(2, 0), 1.0).contains(CVector(2)) ? 1.0 : 0.0, 0.0, 0.0));
    return rep;
}

// ---------------------------------------------------------------------------
// Measures

namespace {

Estimate ball_volume(const CVector& center, double gamma, double alpha, const QuadSpec& spec) {
    return volume(Region::bergman_ball(BallPoint(center), gamma), alpha, spec.with_strategy(Strategy::Pushforward));
}

// v_alpha(D(x, gamma)) in the disc by the midpoint rule on cells x cells
// squares covering the disc's Euclidean hull; membership tested with beta.
double grid_disc_volume(double x, double gamma, double alpha, int cells) {
    const double t = std::tanh(gamma);
    const double centre = x * (1.0 - t * t) / (1.0 - t * t * x * x);
    const double radius = t * (1.0 - x * x) / (1.0 - t * t * x * x);
    const double h = 2.0 * radius / cells;
    const double c_alpha = (alpha + 1.0) / std::numbers::pi;
    double sum = 0.0;
    for (int i = 0; i < cells; ++i) {
        double row = 0.0;
        for (int j = 0; j < cells; ++j) {
            const cplx w(centre - radius + (i + 0.5) * h, -radius + (j + 0.5) * h);
            if (std::norm(w) >= 1.0 || bergman_metric(CVector{x}, CVector{w}) >= gamma) continue;
            row += std::pow(1.0 - std::norm(w), alpha);
        }
        sum += row;
    }
    return c_alpha * sum * h * h;
}

}  // namespace

Report verify_measures(const ExperimentConfig& cfg) {
    cfg.validate();
    Report rep;
    const double tol_exact = cfg.tol.value_or(1e-12);
    const std::size_t big = or_default(cfg.nodes, 1000000);
    const std::size_t small = std::min<std::size_t>(big, 40000);
    QuadSpec base;
    base.seed = cfg.seed;
    base.threads = cfg.threads;

    // Normalisation, sampled from v_(-0.75) so the weights are not constant.
    for (int n : cfg.dims) {
        for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
            QuadSpec spec = base.with_nodes(big).with_stream("normalization");
            spec.proposal_alpha = -0.75;
            const Estimate e = volume(Region::whole(n), alpha, spec);
            rep.add(make_row("weighted-volume-normalization",
                             Params().add("n", n).add("alpha", alpha).add("nodes", big).add("proposal_alpha", -0.75),
                             e.real(), e.std_error, 1.0, 0.0, e.real(),
                             e.valid && std::abs(e.real() - 1.0) <= 3.0 * e.std_error));
        }
    }
    rep.add(exact_row("normalizing-constant", Params().add("n", 3).add("alpha", 0.0), normalizing_constant(3, 0.0), 1.0,
                      tol_exact));
    rep.add(exact_row("normalizing-constant", Params().add("n", 1).add("alpha", 1.0), normalizing_constant(1, 1.0), 2.0,
                      tol_exact));
    rep.add(exact_row("normalizing-constant", Params().add("n", 2).add("alpha", 0.5), normalizing_constant(2, 0.5),
                      1.875, tol_exact));
    rep.add(exact_row("weighted-density", Params().add("n", 1).add("alpha", 2.0).add("modulus_sq", 0.5),
                      density(Measure::weighted(2.0), CVector{std::sqrt(0.5)}), 0.75, 1e-12));

    // tau(D(c, 1)) in the disc by rejection against the closed form r^2/(1-r^2).
    {
        const double t = std::tanh(1.0);
        const double exact = t * t / (1.0 - t * t);
        for (double c : {0.0, 0.9}) {
            const QuadSpec spec = base.with_nodes(small * 5).with_stream("tau-ball").with_strategy(Strategy::Rejection);
            const Estimate e = integrate([](const CVector&) { return 1.0; }, Region::bergman_ball(BallPoint{c}, 1.0),
                                         Measure::invariant(), spec);
            rep.add(make_row("invariant-ball-volume", Params().add("n", 1).add("gamma", 1.0).add("center", c).add("strategy", "rejection"),
                             e.real(), e.std_error, exact, 0.0, e.real() / exact,
                             e.valid && std::abs(e.real() - exact) <= 3.0 * e.std_error));
        }
    }

    // Pushforward against rejection on a smooth integrand.
    for (int n : cfg.dims) {
        CVector center(n);
        center[0] = 0.5;
        center[n - 1] += cplx(0.0, 0.3);
        const auto g = [](const CVector& w) { return 1.0 + w[0].real() + w.norm_sq(); };
        const Region ball = Region::bergman_ball(BallPoint(center), 0.75);
        for (const Measure& mu : {Measure::invariant(), Measure::weighted(0.0), Measure::weighted(1.0)}) {
            const Estimate push = integrate(g, ball, mu, base.with_nodes(small).with_stream("push").with_strategy(Strategy::Pushforward));
            const Estimate rej = integrate(g, ball, mu, base.with_nodes(4 * small).with_stream("reject").with_strategy(Strategy::Rejection));
            const double se = std::hypot(push.std_error, rej.std_error);
            const std::string mu_name = mu.kind == Measure::Kind::Invariant ? "tau" : "v_" + format_number(mu.alpha);
            rep.add(make_row("pushforward-vs-rejection", Params().add("n", n).add("measure", mu_name).add("gamma", 0.75),
                             push.real(), push.std_error, rej.real(), rej.std_error, push.real() / rej.real(),
                             push.valid && rej.valid && std::abs(push.real() - rej.real()) <= 3.0 * se));
        }
    }

    // Disc volumes by pushforward against a midpoint grid over the bounding box.
    for (double alpha : {0.0, 1.0}) {
        for (double gamma : {0.5, 1.0}) {
            for (double mod : {0.0, 0.5, 0.9}) {
                const Estimate push = ball_volume(CVector{mod}, gamma, alpha, base.with_nodes(200000).with_stream("grid-check"));
                const double grid = grid_disc_volume(mod, gamma, alpha, 1500);
                const double rel = std::abs(push.real() - grid) / grid;
                rep.add(make_row("pushforward-vs-grid-volume",
                                 Params().add("n", 1).add("alpha", alpha).add("gamma", gamma).add("modulus", mod).add("grid", 1500),
                                 push.real(), push.std_error, grid, 0.0, push.real() / grid, rel <= 0.01));
            }
        }
    }

    // Volumes of Bergman balls against (1-|z|^2)^(n+1+alpha).
    const std::vector<double> gammas = cfg.gammas.empty() ? std::vector<double>{0.5, 1.0, 2.0} : cfg.gammas;
    const std::size_t vol_nodes = or_default(cfg.nodes, 20000) == big ? 20000 : or_default(cfg.nodes, 20000);
    for (int n : cfg.dims) {
        const double m = n + 1.0 + cfg.alpha;
        for (double gamma : gammas) {
            std::vector<double> ratios;
            for (double mod : cfg.moduli) {
                const Estimate v = ball_volume(mod * CVector::basis(n, 0), gamma, cfg.alpha,
                                               base.with_nodes(vol_nodes).with_stream("ball-volume"));
                const double scale = std::pow(1.0 - mod * mod, m);
                ratios.push_back(v.real() / scale);
                rep.add(make_row("bergman-ball-volume-ratio",
                                 Params().add("n", n).add("alpha", cfg.alpha).add("gamma", gamma).add("modulus", mod),
                                 v.real(), v.std_error, scale, 0.0, ratios.back(), v.valid && ratios.back() > 0.0));
            }
            const std::string p = Params().add("n", n).add("alpha", cfg.alpha).add("gamma", gamma);
            const double w = window_of(ratios);
            rep.add(make_row("bergman-ball-volume-window", p, *std::max_element(ratios.begin(), ratios.end()), 0.0,
                             *std::min_element(ratios.begin(), ratios.end()), 0.0, w, w <= cfg.window));
            {
                // Growth toward the boundary: one more decade of 1-|z| past the
                // largest modulus must grow the ratio by less than the decade before.
                const std::vector<double> sorted = [&] {
                    auto m = cfg.moduli;
                    std::sort(m.begin(), m.end());
                    return m;
                }();
                const QuadSpec s = base.with_nodes(vol_nodes).with_stream("ball-volume");
                auto ratio_at = [&](double mod) {
                    return ball_volume(mod * CVector::basis(n, 0), gamma, cfg.alpha, s).real() / std::pow(1.0 - mod * mod, m);
                };
                const double last = sorted.back();
                const double prev = 1.0 - 10.0 * (1.0 - last);
                const double probe = 1.0 - 0.1 * (1.0 - last);
                const double g_prev = ratio_at(last) / ratio_at(std::max(prev, 0.0));
                const double g_next = ratio_at(probe) / ratio_at(last);
                rep.add(make_row("bergman-ball-volume-growth", Params(p).add("probe_modulus", probe), g_next, 0.0, g_prev, 0.0,
                                 g_next / g_prev, g_next < g_prev || g_next <= 1.0));
            }
        }
    }

    // Comparability of 1-|a|^2, 1-|z|^2, |1-<a,z>| for z in D(a, gamma), and of
    // |1-<z,u>|, |1-<z,v>| for beta(u,v) < gamma.
    const double cg = cfg.comparability_gamma;
    for (int n : cfg.dims) {
        const auto inner = invariant_ball_nodes(n, cg, cfg.trials, cfg.seed, stream_tag("comparability"));
        double lo1 = kInf, hi1 = 0.0, lo2 = kInf, hi2 = 0.0, lo3 = kInf, hi3 = 0.0, lo4 = kInf, hi4 = 0.0;
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            NodeRng rng(cfg.seed, stream_tag("comparability-centres") ^ static_cast<std::uint64_t>(n), i);
            const CVector a = random_in_ball(n, rng, 0.999);
            const CVector z = Automorphism(BallPoint(a)).apply(inner[i]);
            const double ga = 1.0 - a.norm_sq();
            const double gz = (1.0 - a.norm_sq()) * (1.0 - inner[i].norm_sq()) / std::norm(1.0 - herm_inner(inner[i], a));
            const double d = std::abs(1.0 - herm_inner(a, z));
            lo1 = std::min(lo1, gz / ga), hi1 = std::max(hi1, gz / ga);
            lo2 = std::min(lo2, d / ga), hi2 = std::max(hi2, d / ga);
            lo3 = std::min(lo3, d / gz), hi3 = std::max(hi3, d / gz);

            CVector x = random_in_ball(n, rng, 1.0);
            if (i % 4 == 0) x = (1.0 / x.norm()) * x;
            const CVector u = random_in_ball(n, rng, 0.999);
            const CVector v = Automorphism(BallPoint(u)).apply(inner[(i + 1) % cfg.trials]);
            const double r = std::abs(1.0 - herm_inner(x, u)) / std::abs(1.0 - herm_inner(x, v));
            lo4 = std::min(lo4, r), hi4 = std::max(hi4, r);
        }
        const std::string p = Params().add("n", n).add("gamma", cg).add("samples", cfg.trials);
        const double w3 = std::max({hi1 / lo1, hi2 / lo2, hi3 / lo3});
        rep.add(make_row("ball-point-comparability-window", p, w3, 0.0, cfg.window, 0.0, w3 / cfg.window, w3 <= cfg.window));
        rep.add(make_row("kernel-factor-comparability-window", p, hi4 / lo4, 0.0, cfg.window, 0.0,
                         hi4 / lo4 / cfg.window, hi4 / lo4 <= cfg.window));
    }

    // Doubling: rho balls are doubling; Bergman-metric balls are not, the
    // ratio grows without bound with the radius at a boundary-adjacent centre.
    {
        const DoublingReport d = doubling_check(BallMetric::Rho, 1, cfg.alpha, 100, 0.01, 1.0,
                                                base.with_nodes(small).with_stream("rho-doubling"));
        rep.add(make_row("rho-doubling-constant", Params().add("n", 1).add("alpha", cfg.alpha).add("balls", 100),
                         d.constant, 0.0, d.min_ratio, 0.0, d.constant,
                         std::isfinite(d.constant) && d.min_ratio >= 1.0 && d.evaluated > 0));
        // The centre must sit deeper than the doubled ball reaches: 1-|x|^2 = 1e-2 e^(-8r).
        std::vector<double> ratios;
        for (double r : {0.5, 1.0, 2.0, 3.0}) {
            const CVector x = std::sqrt(1.0 - 1e-2 * std::exp(-8.0 * r)) * CVector::basis(1, 0);
            const QuadSpec s = base.with_nodes(small).with_stream("beta-doubling");
            ratios.push_back(ball_volume(x, 2 * r, cfg.alpha, s).real() / ball_volume(x, r, cfg.alpha, s).real());
        }
        const bool increasing = std::is_sorted(ratios.begin(), ratios.end());
        rep.add(make_row("bergman-metric-doubling-growth",
                         Params().add("n", 1).add("alpha", cfg.alpha).add("centre_gap", "1e-2*exp(-8r)").add("radii", "0.5|1|2|3"),
                         ratios.back(), 0.0, ratios.front(), 0.0, ratios.back() / ratios.front(),
                         increasing && ratios.back() >= 10.0 * ratios.front()));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Kernels

Report verify_kernels(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!(cfg.alpha > -1.0)) throw std::invalid_argument("verify kernels: alpha must exceed -1");
    Report rep;
    const int n = cfg.n;
    const double alpha = cfg.alpha;
    const double m = n + 1.0 + alpha;
    const double tol_exact = cfg.tol.value_or(1e-12);
    const std::string pn = Params().add("n", n).add("alpha", alpha);

    {
        double herm = 0.0, origin = 0.0;
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            NodeRng rng(cfg.seed, stream_tag("verify-kernel"), i);
            const CVector z = random_in_ball(n, rng, 0.999);
            const CVector w = random_in_ball(n, rng, 0.999);
            herm = std::max(herm, std::abs(bergman_kernel(alpha, z, w) - std::conj(bergman_kernel(alpha, w, z))));
            origin = std::max(origin, std::abs(bergman_kernel(alpha, z, CVector(n)) - 1.0));
        }
        rep.add(bound_row("kernel-hermitian-symmetry", pn, herm, 0.0));
        rep.add(bound_row("kernel-at-origin", pn, origin, tol_exact));
        rep.add(exact_row("kernel-hand-value", Params().add("n", 1).add("alpha", 0.0),
                          bergman_kernel(0.0, CVector{0.5}, CVector{0.5}).real(), 1.0 / 0.5625, tol_exact));
    }

    // Size and smoothness constants.
    const std::size_t pairs_n = 10 * cfg.trials;
    {
        const KernelConstant c1 = kernel_size_check(alpha, sample_pairs(n, pairs_n, cfg.seed));
        const KernelConstant c2 = kernel_size_check(alpha, sample_pairs(n, 2 * pairs_n, cfg.seed));
        const double ratio = c2.constant / c1.constant;
        rep.add(make_row("kernel-size-constant-stability", Params(pn).add("pairs", pairs_n), c2.constant, 0.0,
                         c1.constant, 0.0, ratio, std::isfinite(ratio) && std::abs(ratio - 1.0) <= 0.2));
        rep.add(bound_row("kernel-size-constant-bound", Params(pn).add("pairs", 2 * pairs_n), c2.constant,
                          std::pow(3.0, m)));
        const KernelConstant s1 = kernel_smoothness_check(alpha, sample_triples(n, pairs_n, cfg.seed), 4.0);
        const KernelConstant s2 = kernel_smoothness_check(alpha, sample_triples(n, 2 * pairs_n, cfg.seed), 4.0);
        rep.add(make_row("kernel-smoothness-constant", Params(pn).add("triples", pairs_n).add("c1", 4.0), s2.constant,
                         0.0, s1.constant, 0.0, s2.constant / s1.constant,
                         std::isfinite(s2.constant) && s1.evaluated > 0));
        const InnerNodes ball = InnerNodes::draw(n, 1.0, 64, cfg.seed, stream_tag("ball-smoothness"));
        const KernelConstant b1 = kernel_ball_smoothness_check(alpha, 1.0, sample_triples(n, pairs_n / 10, cfg.seed), 4.0, ball);
        rep.add(make_row("kernel-ball-smoothness-constant", Params(pn).add("triples", pairs_n / 10).add("gamma", 1.0).add("c1", 4.0),
                         b1.constant, 0.0, kInf, 0.0, 0.0, std::isfinite(b1.constant) && b1.evaluated > 0));
        const std::vector<double> etas{1e-1, 1e-2, 1e-3, 1e-4};
        const auto growth = smoothness_without_filter(n, alpha, etas);
        const bool increasing = std::is_sorted(growth.begin(), growth.end()) && growth.front() < growth.back();
        rep.add(make_row("kernel-smoothness-unfiltered-growth", Params(pn).add("eta", "1e-1..1e-4"), growth.back(), 0.0,
                         growth.front(), 0.0, growth.back() / growth.front(),
                         increasing && growth.back() >= 1e3 * growth.front()));
    }

    // Vector kernels: fibres, identities and constants.
    const double gamma = cfg.gammas.empty() ? 1.0 : cfg.gammas.front();
    const double q = cfg.q > 1.0 ? cfg.q : 2.0;
    CVector pole(n);
    pole[0] = cplx(0.6, 0.2);
    const HoloFun f = HoloFun::kernel_power(BallPoint(pole), n + 1.0);
    const std::size_t e_nodes = or_default(cfg.inner_nodes, 20000);
    const InnerNodes shared = InnerNodes::draw(n, gamma, e_nodes, cfg.seed, stream_tag("e-norm"));
    const InnerNodes coarse = InnerNodes::draw(n, gamma, 128, cfg.seed, stream_tag("e-norm-constants"));
    const std::pair<VectorKernel, FunctionalSelector> kernels[] = {
        {VectorKernel::Tent, FunctionalSelector::tent(gamma, q)},
        {VectorKernel::Radial, FunctionalSelector::area_radial(gamma, q)},
        {VectorKernel::Grad, FunctionalSelector::area_grad(gamma, q)},
        {VectorKernel::InvGrad, FunctionalSelector::area_invgrad(gamma, q)},
    };
    CVector fz(n), fw(n);
    fz[0] = cplx(0.2, 0.1);
    fz[n - 1] += 0.25;
    fw[0] = cplx(-0.1, 0.2);
    for (const auto& [kind, sel] : kernels) {
        const VectorKernelId id{kind, alpha, gamma, q};
        const std::string pk = Params(pn).add("kernel", id.label());

        const CVector exact = kernel_fiber(id, f, fz, fw);
        const auto est = kernel_fiber_by_integration(
            id, f, fz, fw, QuadSpec{}.with_nodes(or_default(cfg.nodes, 100000)).with_stream("fibre"));
        double worst = 0.0;
        for (int j = 0; j < exact.dim(); ++j)
            worst = std::max(worst, std::abs(est[j].value - exact[j]) / std::max(est[j].std_error, 1e-300));
        rep.add(bound_row("kernel-fibre-reproduction-zscore", pk, worst, 4.0));

        FunctionalOptions opt;
        opt.seed = cfg.seed;
        opt.numeric_invariant_gradient = true;
        const FunctionalEvaluator functional(sel, f, shared, opt);
        double rel = 0.0;
        for (std::size_t i = 0; i < 100; ++i) {
            NodeRng rng(cfg.seed, stream_tag("identity-points"), i);
            const CVector z = random_in_ball(n, rng, 0.95);
            const double a = vector_kernel_apply(id, f, z, shared);
            const double b = functional(z);
            rel = std::max(rel, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
        rep.add(bound_row("vector-kernel-functional-identity", Params(pk).add("points", 100).add("nodes", e_nodes), rel,
                          0.02));

        const KernelConstant size = kernel_size_check(id, sample_pairs(n, 500, cfg.seed), coarse);
        rep.add(make_row("vector-kernel-size-constant", Params(pk).add("pairs", 500), size.constant, 0.0, kInf, 0.0, 0.0,
                         std::isfinite(size.constant) && size.evaluated > 0));
        const KernelConstant smooth = kernel_smoothness_check(id, sample_triples(n, 500, cfg.seed), 4.0, coarse);
        rep.add(make_row("vector-kernel-smoothness-constant", Params(pk).add("triples", 500).add("c1", 4.0),
                         smooth.constant, 0.0, kInf, 0.0, 0.0, std::isfinite(smooth.constant) && smooth.evaluated > 0));
    }

    // The projection reproduces holomorphic polynomials; antiholomorphic
    // monomials project to 0 and w_1 |w|^2 to (n+1)/(n+2+alpha) z_1.
    {
        const std::size_t proj_nodes = or_default(cfg.nodes, 100000);
        HoloFun poly = HoloFun::constant(n, 1.0) + HoloFun::coordinate(n, 0);
        {
            std::array<int, kMaxDim> idx{};
            idx[0] = 1;
            idx[n - 1] += 1;
            poly += HoloFun::monomial(n, std::span<const int>(idx.data(), n), -2.0);
            idx = {};
            idx[0] = 3;
            poly += HoloFun::monomial(n, std::span<const int>(idx.data(), n), cplx(0.0, 1.0));
        }
        double worst = 0.0, worst_anti = 0.0, worst_moment = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            NodeRng rng(cfg.seed, stream_tag("projection-points"), i);
            const CVector z = random_in_ball(n, rng, 0.5);
            const QuadSpec spec = QuadSpec{}.with_nodes(proj_nodes).with_stream("projection");
            const Estimate e = bergman_project([&](const CVector& w) { return poly(w); }, alpha, z, spec);
            worst = std::max(worst, std::abs(e.value - poly(z)) / e.std_error);
            if (i < 5) {
                const Estimate anti = bergman_project([](const CVector& w) { return std::conj(w[0]); }, alpha, z, spec);
                worst_anti = std::max(worst_anti, std::abs(anti.value) / anti.std_error);
                const Estimate mom = bergman_project([](const CVector& w) { return w[0] * w.norm_sq(); }, alpha, z, spec);
                const cplx expect = (n + 1.0) / (n + 2.0 + alpha) * z[0];
                worst_moment = std::max(worst_moment, std::abs(mom.value - expect) / mom.std_error);
            }
        }
        rep.add(bound_row("projection-reproduces-polynomial-zscore", Params(pn).add("points", 20).add("max_modulus", 0.5).add("degree", 3),
                          worst, 3.0));
        rep.add(bound_row("projection-antiholomorphic-zscore", Params(pn).add("points", 5), worst_anti, 3.0));
        rep.add(bound_row("projection-radial-moment-zscore", Params(pn).add("points", 5), worst_moment, 3.0));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Norm equivalences

FunctionalKind parse_functional(std::string_view name) {
    static const std::pair<std::string_view, FunctionalKind> names[] = {
        {"maximal", FunctionalKind::Maximal},         {"maximal-k", FunctionalKind::MaximalK},
        {"area-radial", FunctionalKind::AreaRadial},  {"area-grad", FunctionalKind::AreaGrad},
        {"area-invgrad", FunctionalKind::AreaInvGrad}, {"tent", FunctionalKind::Tent},
        {"tent-sup", FunctionalKind::TentSup},        {"hlmax", FunctionalKind::HLMax},
        {"area-radial-k", FunctionalKind::AreaRadialK},
    };
    for (const auto& [s, k] : names)
        if (s == name) return k;
    throw std::invalid_argument("unknown functional '" + std::string(name) + "'");
}

std::string functional_name(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::Maximal: return "maximal";
        case FunctionalKind::MaximalK: return "maximal-k";
        case FunctionalKind::AreaRadial: return "area-radial";
        case FunctionalKind::AreaGrad: return "area-grad";
        case FunctionalKind::AreaInvGrad: return "area-invgrad";
        case FunctionalKind::Tent: return "tent";
        case FunctionalKind::TentSup: return "tent-sup";
        case FunctionalKind::HLMax: return "hlmax";
        case FunctionalKind::AreaRadialK: return "area-radial-k";
    }
    return "?";
}

namespace {

bool uses_k(FunctionalKind kind) {
    return kind == FunctionalKind::MaximalK || kind == FunctionalKind::AreaRadialK || kind == FunctionalKind::HLMax;
}

// Derivative-based comparisons carry |f(0)|, since they vanish on constants.
bool adds_value_at_origin(FunctionalKind kind, int k) {
    switch (kind) {
        case FunctionalKind::MaximalK:
        case FunctionalKind::AreaRadial:
        case FunctionalKind::AreaGrad:
        case FunctionalKind::AreaInvGrad:
        case FunctionalKind::AreaRadialK: return true;
        case FunctionalKind::HLMax: return k > 0;
        default: return false;
    }
}

FunctionalSelector make_selector(FunctionalKind kind, double gamma, double q, int k, double alpha) {
    FunctionalSelector s{kind, gamma, q, k, alpha};
    if (kind == FunctionalKind::AreaRadial || kind == FunctionalKind::AreaGrad) s.k = 1;
    if (!uses_k(kind) && kind != FunctionalKind::AreaRadial && kind != FunctionalKind::AreaGrad) s.k = 0;
    return s;
}

// (mean of y)^(1/p) with a delta-method standard error.
std::pair<double, double> lp_norm(const std::vector<cplx>& y, double p) {
    const Estimate e = summarize(y);
    const double mean = e.real();
    if (!(mean > 0.0)) return {0.0, 0.0};
    return {std::pow(mean, 1.0 / p), e.std_error / p * std::pow(mean, 1.0 / p - 1.0)};
}

// Value of tau(D(0,gamma))^(1/q)-type exact answers for the constant function 1.
double functional_of_one(FunctionalKind kind, int n, double gamma, double q, int k) {
    switch (kind) {
        case FunctionalKind::Maximal:
        case FunctionalKind::TentSup: return 1.0;
        case FunctionalKind::MaximalK: return k == 0 ? 1.0 : 0.0;
        case FunctionalKind::Tent: return std::pow(invariant_ball_volume(n, gamma), 1.0 / q);
        case FunctionalKind::AreaRadialK: return k == 0 ? std::pow(invariant_ball_volume(n, gamma), 1.0 / q) : 0.0;
        case FunctionalKind::HLMax: return k == 0 ? 1.0 : 0.0;
        default: return 0.0;
    }
}

}  // namespace

Report run_equivalence(const ExperimentConfig& cfg, FunctionalKind kind) {
    cfg.validate();
    if (!(cfg.alpha > -1.0)) throw std::invalid_argument("equiv: alpha must exceed -1");
    const int n = cfg.n;
    const double alpha = cfg.alpha;
    const double b = cfg.b.value_or(n + 1.0);
    for (double p : cfg.ps)
        if (!(p * b > n + 1.0 + alpha))
            throw std::invalid_argument("equiv: the family is not in A^p_alpha (need p b > n + 1 + alpha)");
    const std::vector<double> gammas = cfg.gammas.empty() ? std::vector<double>{1.0} : cfg.gammas;
    const std::vector<int> ks = uses_k(kind) ? cfg.ks : std::vector<int>{0};
    const bool hl = kind == FunctionalKind::HLMax;
    const std::size_t outer = or_default(cfg.nodes, hl ? 1000 : 2000);
    FunctionalOptions opt;
    opt.inner_nodes = or_default(cfg.inner_nodes, 192);
    opt.hl_centers = 128;
    opt.hl_inner = 48;
    opt.seed = cfg.seed;
    if (kind != FunctionalKind::AreaInvGrad) opt.numeric_invariant_gradient = false;
    const std::string name = functional_name(kind);

    // ratios[(p, gamma, k)] across moduli
    struct Key {
        double p, gamma;
        int k;
    };
    std::vector<Key> keys;
    for (double p : cfg.ps)
        for (double g : gammas)
            for (int k : ks) keys.push_back({p, g, k});
    std::vector<std::vector<double>> ratios(keys.size());

    Report rows;
    for (double mod : cfg.moduli) {
        const CVector a = mod * CVector::basis(n, 0);
        const HoloFun f = HoloFun::kernel_power(BallPoint(a), b);
        QuadSpec spec;
        spec.seed = cfg.seed;
        spec.stream = stream_tag("equivalence-outer");
        spec.strategy = Strategy::PoleMixture;
        spec.poles = {a};
        const std::vector<Node> nodes = materialize(*make_sampler(Region::whole(n), Measure::weighted(alpha), spec), outer);
        std::vector<double> fabs(outer);
        for (std::size_t i = 0; i < outer; ++i) fabs[i] = std::abs(f(nodes[i].point));
        const double f0 = std::abs(f(CVector(n)));

        for (double g : gammas) {
            for (int k : ks) {
                const FunctionalSelector sel = make_selector(kind, g, cfg.q, k, alpha);
                const FunctionalEvaluator eval(sel, f, opt);
                std::vector<double> F(outer);
                parallel_for(outer, cfg.threads, [&](std::size_t i) { F[i] = eval(nodes[i].point); });
                for (double p : cfg.ps) {
                    // normalising factor of the family member for this p
                    const double c = std::pow(1.0 - mod * mod, (p * b - n - 1.0 - alpha) / p);
                    std::vector<cplx> yf(outer), yF(outer);
                    for (std::size_t i = 0; i < outer; ++i) {
                        yf[i] = nodes[i].weight * std::pow(fabs[i], p);
                        yF[i] = nodes[i].weight * std::pow(F[i], p);
                    }
                    auto [nf, nf_se] = lp_norm(yf, p);
                    auto [nF, nF_se] = lp_norm(yF, p);
                    nf *= c, nf_se *= c, nF *= c, nF_se *= c;
                    const bool origin_term = adds_value_at_origin(kind, sel.k);
                    const double lhs = nF + (origin_term ? c * f0 : 0.0);
                    const double ratio = lhs / nf;
                    const std::string params = Params()
                                                   .add("n", n)
                                                   .add("alpha", alpha)
                                                   .add("p", p)
                                                   .add("q", cfg.q)
                                                   .add("gamma", g)
                                                   .add("k", sel.k)
                                                   .add("b", b)
                                                   .add("modulus", mod)
                                                   .add("nodes", outer)
                                                   .add("inner", opt.inner_nodes);
                    rows.add(make_row("equivalence-" + name, params, lhs, nF_se, nf, nf_se, ratio,
                                      std::isfinite(ratio) && ratio > 0.0));
                    for (std::size_t j = 0; j < keys.size(); ++j)
                        if (keys[j].p == p && keys[j].gamma == g && keys[j].k == k) ratios[j].push_back(ratio);
                    if (mod == 0.0) {
                        // f is the constant 1: both sides are exact.
                        const double expect = functional_of_one(kind, n, g, cfg.q, sel.k) + (origin_term ? 1.0 : 0.0);
                        rows.add(exact_row("equivalence-constant-" + name, params, ratio, expect,
                                           cfg.tol.value_or(1e-12)));
                    }
                }
            }
        }
    }
    for (std::size_t j = 0; j < keys.size(); ++j) {
        const auto& r = ratios[j];
        const double w = window_of(r);
        const int k_eff = make_selector(kind, keys[j].gamma, cfg.q, keys[j].k, alpha).k;
        rows.add(make_row("equivalence-window-" + name,
                          Params()
                              .add("n", n)
                              .add("alpha", alpha)
                              .add("p", keys[j].p)
                              .add("q", cfg.q)
                              .add("gamma", keys[j].gamma)
                              .add("k", k_eff)
                              .add("b", b)
                              .add("moduli", cfg.moduli.size()),
                          *std::max_element(r.begin(), r.end()), 0.0, *std::min_element(r.begin(), r.end()), 0.0, w,
                          std::isfinite(w) && w <= cfg.window));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Weak type

std::vector<double> lambda_grid(double scale) {
    std::vector<double> grid(48);
    for (int j = 0; j < 48; ++j) grid[j] = scale * std::pow(10.0, -3.0 + 6.0 * j / 47.0);
    return grid;
}

namespace {

// sup over the grid of lambda * sum_j W_j [v_j > lambda], W_j = weight_j / M.
WeakTypePoint level_set_sup(const std::vector<double>& values, const std::vector<double>& weights) {
    const std::size_t m = values.size();
    WeakTypePoint out;
    // weighted median
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double acc = 0.0;
    out.median = values[order.back()];
    for (std::size_t i : order) {
        acc += weights[i];
        if (acc >= 0.5 * total) {
            out.median = values[i];
            break;
        }
    }
    for (double lambda : lambda_grid(out.median)) {
        std::vector<cplx> y(m);
        for (std::size_t j = 0; j < m; ++j) y[j] = values[j] > lambda ? lambda * weights[j] : 0.0;
        const Estimate e = summarize(y);
        if (e.real() > out.sup) {
            out.sup = e.real();
            out.sup_se = e.std_error;
            out.lambda = lambda;
        }
    }
    return out;
}

}  // namespace

std::vector<WeakTypePoint> weak_type_profile(int n, double alpha, const std::vector<double>& radii,
                                             std::size_t outer_nodes, std::size_t tube_nodes, std::uint64_t seed) {
    if (!(alpha > -1.0)) throw std::invalid_argument("weak type: alpha must exceed -1");
    std::vector<WeakTypePoint> out;
    const CVector zeta = CVector::basis(n, 0);
    for (double r : radii) {
        QuadSpec tube_spec;
        tube_spec.seed = seed;
        tube_spec.stream = stream_tag("weak-type-tube");
        std::vector<Node> tube;
        for (const Node& nd : materialize(*make_sampler(Region::tube(zeta, r), Measure::weighted(alpha), tube_spec), tube_nodes))
            if (nd.weight > 0.0) tube.push_back(nd);
        if (tube.empty()) throw std::runtime_error("weak type: no tube nodes accepted");
        double wsum = 0.0;
        for (const auto& nd : tube) wsum += nd.weight;

        QuadSpec outer_spec;
        outer_spec.seed = seed;
        outer_spec.stream = stream_tag("weak-type-outer");
        outer_spec.strategy = Strategy::PoleMixture;
        outer_spec.poles = {(1.0 - r * r) * zeta};
        const auto sampler = make_sampler(Region::whole(n), Measure::weighted(alpha), outer_spec);
        std::vector<double> values(outer_nodes), weights(outer_nodes);
        for (std::size_t j = 0; j < outer_nodes; ++j) {
            const Node nd = sampler->node(j);
            weights[j] = nd.weight;
            if (nd.weight == 0.0) continue;
            std::vector<cplx> t(tube.size());
            for (std::size_t i = 0; i < tube.size(); ++i) t[i] = tube[i].weight * bergman_kernel(alpha, nd.point, tube[i].point);
            values[j] = std::abs(pairwise_sum(std::span<const cplx>(t))) / wsum;
        }
        WeakTypePoint pt = level_set_sup(values, weights);
        pt.r = r;
        out.push_back(pt);
    }
    return out;
}

Report run_weak_type(const ExperimentConfig& cfg) {
    cfg.validate();
    Report rep;
    const std::size_t outer = or_default(cfg.nodes, 10000);
    const std::size_t tube = or_default(cfg.inner_nodes, 1000);
    const auto profile = weak_type_profile(cfg.n, cfg.alpha, cfg.radii, outer, tube, cfg.seed);
    std::vector<double> sups;
    for (const auto& pt : profile) {
        sups.push_back(pt.sup);
        rep.add(make_row("weak-type-level-set-sup",
                         Params().add("n", cfg.n).add("alpha", cfg.alpha).add("r", pt.r).add("nodes", outer).add("tube_nodes", tube)
                             .add("lambda", pt.lambda).add("median", pt.median),
                         pt.sup, pt.sup_se, 1.0, 0.0, pt.sup, std::isfinite(pt.sup) && pt.sup > 0.0));
    }
    const double w = window_of(sups);
    rep.add(make_row("weak-type-window", Params().add("n", cfg.n).add("alpha", cfg.alpha).add("radii", cfg.radii.size()),
                     *std::max_element(sups.begin(), sups.end()), 0.0, *std::min_element(sups.begin(), sups.end()), 0.0,
                     w, std::isfinite(w) && w <= cfg.window));

    // P 1 = 1: the level-set estimator on the constant returns the largest grid point below 1.
    {
        const auto sampler = make_sampler(Region::whole(cfg.n), Measure::weighted(cfg.alpha),
                                          QuadSpec{}.with_stream("weak-type-constant"));
        std::vector<double> values(1000, 1.0), weights(1000);
        for (std::size_t j = 0; j < weights.size(); ++j) weights[j] = sampler->node(j).weight;
        const WeakTypePoint pt = level_set_sup(values, weights);
        double expect = 0.0;
        for (double l : lambda_grid(1.0))
            if (l < 1.0) expect = l;
        rep.add(exact_row("weak-type-constant", Params().add("n", cfg.n).add("alpha", cfg.alpha), pt.sup, expect,
                          cfg.tol.value_or(1e-12)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Atoms

namespace {

struct SizeCheck {
    double ratio = 0.0;
    double std_error = 0.0;
};

// Standard error of (int |a|^q) v(Q)^(q-1) as estimated on the atom's own
// node set, which is where the size was normalised; `proposals` counts the
// rejected draws too.
double node_set_size_error(const Atom& a, std::size_t proposals) {
    const double count = static_cast<double>(proposals);
    std::vector<double> w(proposals, 0.0), y(proposals, 0.0);
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        w[i] = count * a.nodes[i].weight;
        y[i] = w[i] * std::pow(std::abs(a.values[i]), a.q);
    }
    const double v = std::accumulate(w.begin(), w.end(), 0.0) / count;
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / count;
    std::vector<cplx> z(proposals);
    for (std::size_t i = 0; i < proposals; ++i)
        z[i] = std::pow(v, a.q - 1.0) * y[i] + (a.q - 1.0) * m * std::pow(v, a.q - 2.0) * w[i];
    return summarize(z).std_error;
}

SizeCheck atom_size_ratio(const Atom& a, std::uint64_t seed, std::size_t index) {
    QuadSpec spec;
    spec.seed = seed;
    spec.stream = stream_tag("atom-size-check") ^ index;
    const std::size_t count = 20000;
    const std::vector<Node> nodes = materialize(*make_sampler(a.tube(), Measure::weighted(a.alpha), spec), count);
    std::vector<double> w(count), y(count);
    for (std::size_t i = 0; i < count; ++i) {
        w[i] = nodes[i].weight;
        y[i] = w[i] == 0.0 ? 0.0 : w[i] * std::pow(std::abs(a(nodes[i].point)), a.q);
    }
    const double v = std::accumulate(w.begin(), w.end(), 0.0) / count;
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / count;
    SizeCheck out;
    out.ratio = m * std::pow(v, a.q - 1.0);
    // delta method on R = m v^(q-1)
    std::vector<cplx> z(count);
    for (std::size_t i = 0; i < count; ++i)
        z[i] = std::pow(v, a.q - 1.0) * y[i] + (a.q - 1.0) * m * std::pow(v, a.q - 2.0) * w[i];
    out.std_error = summarize(z).std_error;
    return out;
}

}  // namespace

Report run_atoms(const ExperimentConfig& cfg, const AtomBatch& batch) {
    cfg.validate();
    batch.validate();
    Report rep;
    AtomOptions opt;
    opt.nodes = or_default(cfg.inner_nodes, 1000);
    QuadSpec outer = QuadSpec{}.with_nodes(or_default(cfg.nodes, 2000)).with_stream("atom-projection");
    outer.seed = batch.seed;
    const std::string pb = Params()
                               .add("n", batch.n)
                               .add("q", batch.q)
                               .add("alpha", batch.alpha)
                               .add("count", batch.count)
                               .add("r_range", format_number(batch.r_min) + "|" + format_number(batch.r_max))
                               .add("seed", static_cast<double>(batch.seed));

    std::size_t outside = 0, degenerate = 0;
    double worst_mean = 0.0, worst_size = 0.0, worst_l1 = 0.0;
    std::vector<double> proj;
    for (std::size_t i = 0; i < batch.count; ++i) {
        const Atom a = batch_atom(batch, i, opt);
        if (a.degenerate) {
            ++degenerate;
            continue;
        }
        for (const auto& nd : a.nodes)
            if (!a.tube().contains(nd.point)) ++outside;
        worst_mean = std::max(worst_mean, std::abs(a.node_mean()));
        worst_l1 = std::max(worst_l1, a.node_l1_norm());
        // Size on fresh nodes: R = (int |a|^q) v(Q)^(q-1) should not exceed 1.
        const SizeCheck sc = atom_size_ratio(a, batch.seed, i);
        const double se = std::hypot(sc.std_error, node_set_size_error(a, opt.nodes));
        worst_size = std::max(worst_size, (sc.ratio - 1.0) / se);
        proj.push_back(projected_l1_norm(a, a.alpha, outer).real());
    }
    rep.add(bound_row("atom-support-violations", pb, static_cast<double>(outside), 0.0));
    rep.add(bound_row("atom-degenerate-profiles", pb, static_cast<double>(degenerate), 0.0));
    rep.add(bound_row("atom-node-mean", pb, worst_mean, cfg.tol.value_or(1e-10)));
    rep.add(bound_row("atom-size-excess-zscore", Params(pb).add("check_nodes", 20000), worst_size, 3.0));
    rep.add(bound_row("atom-l1-norm", pb, worst_l1, 1.0 + 1e-10));
    if (!proj.empty()) {
        std::vector<double> sorted = proj;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                                : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
        rep.add(make_row("atom-projection-l1-spread", Params(pb).add("outer_nodes", outer.node_count), sorted.back(), 0.0,
                         median, 0.0, sorted.back() / median, sorted.back() <= 5.0 * median));
    }
    {
        const Atom one = Atom::constant_one(batch.n, batch.q, batch.alpha);
        double worst = 0.0;
        for (double x : {0.0, 0.5, 0.9, 0.99})
            worst = std::max(worst, std::abs(atom_project(one, batch.alpha, x * CVector::basis(batch.n, 0)) - 1.0));
        rep.add(bound_row("atom-exceptional-reproduction", pb, worst, 0.0));
    }

    // Synthesis over a separated lattice.
    const int n = batch.n;
    const double p = cfg.ps.front();
    const double alpha = batch.alpha;
    const double b = cfg.b.value_or(synthesis_exponent_bound(n, p, alpha) + 1.0);
    const Lattice lat = build_lattice(n, 1.0, 32, batch.seed, 3);
    QuadSpec norm_spec = QuadSpec{}.with_nodes(or_default(cfg.nodes, 2000) * 10).with_stream("synthesis-norm");
    norm_spec.seed = batch.seed;
    norm_spec.strategy = Strategy::PoleMixture;
    norm_spec.poles = lat.points;
    const std::string ps = Params().add("n", n).add("p", p).add("alpha", alpha).add("b", b).add("lattice", lat.points.size())
                               .add("draws", 20);
    std::vector<double> constants;
    double homogeneity = 0.0;
    for (std::size_t d = 0; d < 20; ++d) {
        std::vector<cplx> c(lat.points.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            NodeRng rng(batch.seed, stream_tag("synthesis-coefficients") ^ d, k);
            c[k] = cplx(rng.normal(), rng.normal());
            sum += std::pow(std::abs(c[k]), p);
        }
        const HoloFun f = cr_synthesize(lat, c, b, p, alpha);
        const double norm = bergman_norm(f, p, alpha, norm_spec).real();
        constants.push_back(std::pow(norm, p) / sum);
        if (d == 0) {
            for (auto& x : c) x *= 2.0;
            const double doubled = bergman_norm(cr_synthesize(lat, c, b, p, alpha), p, alpha, norm_spec).real();
            homogeneity = std::abs(doubled / norm - 2.0);
        }
    }
    std::vector<double> sorted = constants;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[9] + sorted[10]);
    rep.add(make_row("synthesis-constant-spread", ps, sorted.back() / median, 0.0, sorted.front() / median, 0.0,
                     sorted.back() / sorted.front(), sorted.back() <= 1.5 * median && sorted.front() >= 0.5 * median));
    rep.add(bound_row("synthesis-homogeneity", ps, homogeneity, 1e-12));
    {
        const Lattice origin{{CVector(n)}, 1.0};
        const HoloFun one = cr_synthesize(origin, {1.0}, b, p, alpha);
        NodeRng rng(batch.seed, stream_tag("synthesis-constant"), 0);
        rep.add(exact_row("synthesis-single-origin-term", ps, one(random_in_ball(n, rng, 0.99)).real(), 1.0, 0.0));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Projection of a user function

Report run_project(const HoloFun& f, double alpha, const CVector& at, std::size_t samples, std::uint64_t seed) {
    if (at.dim() != f.dim()) throw std::invalid_argument("project: point dimension does not match the function");
    if (!is_interior(at)) throw std::invalid_argument("project: point must lie in the open ball");
    QuadSpec spec = QuadSpec{}.with_nodes(samples).with_stream("project");
    spec.seed = seed;
    const Estimate e = bergman_project([&](const CVector& w) { return f(w); }, alpha, at, spec);
    const cplx exact = f(at);
    Report rep;
    const std::string p = Params().add("n", f.dim()).add("alpha", alpha).add("samples", samples);
    const bool ok = e.valid && std::abs(e.value - exact) <= 3.0 * e.std_error + 1e-12 * std::abs(exact);
    rep.add(make_row("projection-real-part", p, e.value.real(), e.std_error, exact.real(), 0.0,
                     exact.real() != 0.0 ? e.value.real() / exact.real() : kInf, ok));
    rep.add(make_row("projection-imaginary-part", p, e.value.imag(), e.std_error, exact.imag(), 0.0,
                     exact.imag() != 0.0 ? e.value.imag() / exact.imag() : kInf, ok));
    return rep;
}

// ---------------------------------------------------------------------------
// Space indices

double space_index_map(const SpaceIndex& s) {
    if (!(s.p > 0.0)) throw std::invalid_argument("space index: p must be positive");
    switch (s.kind) {
        case SpaceKind::Besov: return -s.s * s.p - 1.0;  // s = -(alpha + 1)/p
        case SpaceKind::Sobolev: return -(s.p * s.k - s.beta + 1.0);
        case SpaceKind::HardySobolev: return -2.0 * s.s - 1.0;
        case SpaceKind::Hardy: return -1.0;
    }
    return 0.0;
}

SpaceKind parse_space(std::string_view name) {
    if (name == "besov") return SpaceKind::Besov;
    if (name == "sobolev") return SpaceKind::Sobolev;
    if (name == "hardy-sobolev") return SpaceKind::HardySobolev;
    if (name == "hardy") return SpaceKind::Hardy;
    throw std::invalid_argument("unknown space '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

double parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("cannot parse number '" + std::string(s) + "'");
    return v;
}

cplx parse_complex(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty() || (s.back() != 'i' && s.back() != 'j')) return parse_double(s);
    s.remove_suffix(1);
    // split at the last sign that is not an exponent sign or the leading sign
    std::size_t cut = std::string_view::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            cut = i;
            break;
        }
    }
    auto imag_of = [](std::string_view t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_double(t);
    };
    if (cut == std::string_view::npos) return {0.0, imag_of(s)};
    return {parse_double(s.substr(0, cut)), imag_of(s.substr(cut))};
}

std::vector<std::string_view> split(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

CVector parse_point(std::string_view text) {
    const auto parts = split(text);
    if (parts.empty() || static_cast<int>(parts.size()) > kMaxDim) throw std::invalid_argument("point: bad dimension");
    CVector z(static_cast<int>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) z[static_cast<int>(i)] = parse_complex(parts[i]);
    return z;
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    for (auto part : split(text)) out.push_back(parse_double(part));
    return out;
}

}  // namespace bergman
