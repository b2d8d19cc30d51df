#include "bergman/holo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace bergman {

int Monomial::degree() const {
    int d = 0;
    for (int v : index) d += v;
    return d;
}

HoloFun::HoloFun(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("HoloFun: dimension must be in [1, 8]");
}

HoloFun HoloFun::constant(int dim, cplx c) {
    HoloFun f(dim);
    f.add(Monomial{{}, c});
    return f;
}

HoloFun HoloFun::monomial(int dim, std::span<const int> index, cplx c) {
    if (static_cast<int>(index.size()) != dim) throw std::invalid_argument("HoloFun: multi-index length must equal dim");
    Monomial m{{}, c};
    for (int k = 0; k < dim; ++k) {
        if (index[k] < 0) throw std::invalid_argument("HoloFun: negative multi-index entry");
        m.index[k] = index[k];
    }
    HoloFun f(dim);
    f.add(m);
    return f;
}

HoloFun HoloFun::kernel_power(const BallPoint& pole, double b, cplx c, int power) {
    HoloFun f(pole.dim());
    f.add(KernelTerm{pole.coords(), b, power, c});
    return f;
}

HoloFun HoloFun::coordinate(int dim, int k) {
    std::array<int, kMaxDim> idx{};
    idx.at(k) = 1;
    return monomial(dim, std::span<const int>(idx.data(), dim));
}

HoloFun& HoloFun::add(const Monomial& m) {
    if (m.coeff == cplx{}) return *this;
    if (m.degree() > kMaxDegree) throw std::length_error("HoloFun: monomial degree exceeds 8");
    for (int k = dim_; k < kMaxDim; ++k)
        if (m.index[k] != 0) throw std::invalid_argument("HoloFun: multi-index beyond dimension");
    auto it = std::find_if(monomials_.begin(), monomials_.end(), [&](const Monomial& o) { return o.index == m.index; });
    if (it != monomials_.end()) {
        it->coeff += m.coeff;
        if (it->coeff == cplx{}) monomials_.erase(it);
        return *this;
    }
    if (term_count() >= kMaxTerms) throw std::length_error("HoloFun: more than 64 terms");
    monomials_.push_back(m);
    return *this;
}

HoloFun& HoloFun::add(const KernelTerm& t) {
    if (t.coeff == cplx{}) return *this;
    if (t.pole.dim() != dim_) throw std::invalid_argument("HoloFun: pole dimension mismatch");
    if (!is_interior(t.pole)) throw std::domain_error("HoloFun: pole must satisfy |a| < 1");
    if (t.power < 0) throw std::invalid_argument("HoloFun: negative inner power");
    if (!(t.exponent >= 0.0) || !std::isfinite(t.exponent)) throw std::invalid_argument("HoloFun: exponent must be >= 0");
    // u = <z, 0> vanishes identically.
    if (t.pole.norm_sq() == 0.0) return t.power == 0 ? add(Monomial{{}, t.coeff}) : *this;
    if (t.exponent == 0.0 && t.power == 0) return add(Monomial{{}, t.coeff});
    auto it = std::find_if(kernels_.begin(), kernels_.end(), [&](const KernelTerm& o) {
        return o.pole == t.pole && o.exponent == t.exponent && o.power == t.power;
    });
    if (it != kernels_.end()) {
        it->coeff += t.coeff;
        if (it->coeff == cplx{}) kernels_.erase(it);
        return *this;
    }
    if (term_count() >= kMaxTerms) throw std::length_error("HoloFun: more than 64 terms");
    kernels_.push_back(t);
    return *this;
}

HoloFun& HoloFun::operator+=(const HoloFun& g) {
    if (g.dim_ != dim_) throw std::invalid_argument("HoloFun: dimension mismatch");
    for (const auto& m : g.monomials_) add(m);
    for (const auto& t : g.kernels_) add(t);
    return *this;
}

HoloFun& HoloFun::operator*=(cplx c) {
    if (c == cplx{}) {
        monomials_.clear();
        kernels_.clear();
        return *this;
    }
    for (auto& m : monomials_) m.coeff *= c;
    for (auto& t : kernels_) t.coeff *= c;
    return *this;
}

cplx HoloFun::operator()(const CVector& z) const {
    if (z.dim() != dim_) throw std::invalid_argument("HoloFun: point dimension mismatch");
    cplx sum{};
    for (const auto& m : monomials_) {
        cplx v = m.coeff;
        for (int k = 0; k < dim_; ++k)
            for (int e = 0; e < m.index[k]; ++e) v *= z[k];
        sum += v;
    }
    for (const auto& t : kernels_) {
        const cplx u = herm_inner(z, t.pole);
        cplx v = t.coeff;
        for (int e = 0; e < t.power; ++e) v *= u;
        // principal branch: Re(1 - u) > 0 on the open ball
        if (t.exponent != 0.0) v *= std::exp(-t.exponent * std::log(1.0 - u));
        sum += v;
    }
    return sum;
}

HoloFun HoloFun::partial(int k) const {
    if (k < 0 || k >= dim_) throw std::out_of_range("HoloFun::partial: coordinate out of range");
    HoloFun d(dim_);
    for (const auto& m : monomials_) {
        if (m.index[k] == 0) continue;
        Monomial dm = m;
        dm.coeff *= static_cast<double>(m.index[k]);
        dm.index[k] -= 1;
        d.add(dm);
    }
    for (const auto& t : kernels_) {
        const cplx chain = t.coeff * std::conj(t.pole[k]);
        if (chain == cplx{}) continue;
        if (t.power > 0) d.add(KernelTerm{t.pole, t.exponent, t.power - 1, chain * static_cast<double>(t.power)});
        if (t.exponent != 0.0) d.add(KernelTerm{t.pole, t.exponent + 1.0, t.power, chain * t.exponent});
    }
    return d;
}

HoloFun HoloFun::radial_derivative(int order) const {
    if (order < 0) throw std::invalid_argument("radial_derivative: negative order");
    HoloFun f = *this;
    for (int step = 0; step < order; ++step) {
        HoloFun d(dim_);
        for (const auto& m : f.monomials_) {
            if (m.degree() == 0) continue;
            Monomial dm = m;
            dm.coeff *= static_cast<double>(m.degree());
            d.add(dm);
        }
        for (const auto& t : f.kernels_) {
            if (t.power > 0) d.add(KernelTerm{t.pole, t.exponent, t.power, t.coeff * static_cast<double>(t.power)});
            if (t.exponent != 0.0) d.add(KernelTerm{t.pole, t.exponent + 1.0, t.power + 1, t.coeff * t.exponent});
        }
        f = std::move(d);
    }
    return f;
}

double HoloFun::max_exponent() const {
    double b = 0.0;
    for (const auto& t : kernels_) b = std::max(b, t.exponent);
    return b;
}

GradientField::GradientField(const HoloFun& f) {
    for (int k = 0; k < f.dim(); ++k) parts_.push_back(f.partial(k));
}

CVector GradientField::operator()(const CVector& z) const {
    CVector g(dim());
    for (int k = 0; k < dim(); ++k) g[k] = parts_[k](z);
    return g;
}

CVector gradient(const HoloFun& f, const CVector& z) { return GradientField(f)(z); }

CVector invariant_gradient_exact(const CVector& grad, const CVector& z) {
    const double m = z.norm_sq();
    const double s = std::sqrt(1.0 - m);
    CVector out = -s * grad;
    if (m == 0.0) return out;
    cplx rf{};
    for (int k = 0; k < z.dim(); ++k) rf += z[k] * grad[k];
    const cplx scale = (s - (1.0 - m)) * rf / m;
    for (int k = 0; k < z.dim(); ++k) out[k] += scale * std::conj(z[k]);
    return out;
}

CVector invariant_gradient_exact(const HoloFun& f, const CVector& z) {
    return invariant_gradient_exact(gradient(f, z), z);
}

CVector invariant_gradient(const HoloFun& f, const CVector& z, double h) {
    return invariant_gradient([&f](const CVector& w) { return f(w); }, z, h);
}

CVector invariant_gradient(const std::function<cplx(const CVector&)>& f, const CVector& z, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("invariant_gradient: step must be positive");
    const int n = z.dim();
    const Automorphism phi{BallPoint(z)};
    auto g = [&](const CVector& w) { return f(phi.apply(w)); };
    auto diff = [&](int k, double step) {
        CVector e = CVector::basis(n, k);
        const CVector re = step * e;
        const CVector im = cplx(0.0, step) * e;
        const cplx along_re = (g(re) - g(-re)) / (2.0 * step);
        const cplx along_im = (g(im) - g(-im)) / cplx(0.0, 2.0 * step);
        return 0.5 * (along_re + along_im);
    };
    CVector out(n);
    for (int k = 0; k < n; ++k) {
        const cplx coarse = diff(k, h);
        const cplx fine = diff(k, 0.5 * h);
        out[k] = (16.0 * fine - coarse) / 15.0;
        if (!std::isfinite(out[k].real()) || !std::isfinite(out[k].imag()))
            throw std::domain_error("invariant_gradient: non-finite difference");
    }
    return out;
}

namespace {

Estimate root_of(const Estimate& e, double p) {
    Estimate out = e;
    const double m = e.value.real();
    if (!(m > 0.0)) {
        out.value = 0.0;
        out.std_error = 0.0;
        return out;
    }
    const double r = std::pow(m, 1.0 / p);
    out.value = r;
    out.std_error = e.std_error * r / (p * m);
    return out;
}

}  // namespace

Estimate bergman_norm(const HoloFun& f, double p, double alpha, const QuadSpec& spec) {
    if (!(p > 0.0)) throw std::invalid_argument("bergman_norm: p must be positive");
    if (!(alpha > -1.0)) throw std::invalid_argument("bergman_norm: alpha must exceed -1");
    const Estimate e =
        integrate([&](const CVector& z) { return std::pow(std::abs(f(z)), p); }, Region::whole(f.dim()),
                  Measure::weighted(alpha), spec);
    return root_of(e, p);
}

int generalized_order(double p, double alpha) {
    if (!(p > 0.0)) throw std::invalid_argument("generalized_order: p must be positive");
    int n = 0;
    while (!(p * n + alpha > -1.0)) ++n;
    return n;
}

Estimate generalized_norm(const HoloFun& f, double p, double alpha, const QuadSpec& spec) {
    const int order = generalized_order(p, alpha);
    const double shifted = alpha + p * order;
    const HoloFun d = f.radial_derivative(order);
    // (1-|z|^2)^(pN) dv_alpha = (c_alpha / c_shifted) dv_shifted
    const double ratio = normalizing_constant(f.dim(), alpha) / normalizing_constant(f.dim(), shifted);
    Estimate e = integrate([&](const CVector& z) { return std::pow(std::abs(d(z)), p); }, Region::whole(f.dim()),
                           Measure::weighted(shifted), spec);
    e.value *= ratio;
    e.std_error *= ratio;
    Estimate out = root_of(e, p);
    out.value += std::abs(f(CVector(f.dim())));
    return out;
}

SupEstimate bloch_seminorm(const HoloFun& f, const QuadSpec& spec) {
    const int n = f.dim();
    const GradientField grad(f);
    SupEstimate best;
    best.argmax = CVector(n);
    best.value = invariant_gradient_exact(grad(best.argmax), best.argmax).norm();
    const auto sampler = make_sampler(Region::whole(n), Measure::weighted(0.0), spec.with_strategy(Strategy::UniformBall));
    std::vector<double> vals(spec.node_count);
    std::vector<CVector> pts(spec.node_count);
    parallel_for(spec.node_count, spec.threads, [&](std::size_t i) {
        pts[i] = sampler->node(i).point;
        vals[i] = invariant_gradient_exact(grad(pts[i]), pts[i]).norm();
    });
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] > best.value) {
            best.value = vals[i];
            best.argmax = pts[i];
        }
    }
    best.nodes = spec.node_count + 1;
    return best;
}

MembershipProfile kernel_family_profile(int n, double p, double b, double alpha, const std::vector<double>& moduli,
                                        const QuadSpec& spec) {
    if (moduli.size() < 3) throw std::invalid_argument("kernel_family_profile: need at least three moduli");
    MembershipProfile prof;
    prof.moduli = moduli;
    prof.predicted_divergent = p * b <= n + 1.0 + alpha;
    for (double m : moduli) {
        CVector a(n);
        a[0] = m;
        const double scale = std::pow(1.0 - m * m, (p * b - n - 1.0 - alpha) / p);
        const HoloFun f = HoloFun::kernel_power(BallPoint(a), b, scale);
        QuadSpec s = spec;
        s.strategy = Strategy::PoleMixture;
        s.poles = {a};
        prof.pth_power.push_back(integrate([&](const CVector& z) { return std::pow(std::abs(f(z)), p); },
                                           Region::whole(n), Measure::weighted(alpha), s));
    }
    const std::size_t k = moduli.size();
    const double last = prof.pth_power[k - 1].real() - prof.pth_power[k - 2].real();
    const double prev = prof.pth_power[k - 2].real() - prof.pth_power[k - 3].real();
    // Convergent profiles approach their limit geometrically; divergent ones
    // grow by non-shrinking increments.
    prof.diverges = last > 0.0 && std::abs(last) >= 0.6 * std::abs(prev);
    return prof;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

std::string to_json(const HoloFun& f) {
    json terms = json::array();
    for (const auto& m : f.monomials()) {
        json idx = json::array();
        for (int k = 0; k < f.dim(); ++k) idx.push_back(m.index[k]);
        terms.push_back({{"kind", "monomial"}, {"coeff_re", m.coeff.real()}, {"coeff_im", m.coeff.imag()},
                         {"multi_index", idx}});
    }
    for (const auto& t : f.kernels()) {
        json pole = json::array();
        for (int k = 0; k < f.dim(); ++k) pole.push_back({t.pole[k].real(), t.pole[k].imag()});
        terms.push_back({{"kind", "kernel"}, {"coeff_re", t.coeff.real()}, {"coeff_im", t.coeff.imag()},
                         {"pole", pole}, {"exponent", t.exponent}, {"power", t.power}});
    }
    return json{{"dim", f.dim()}, {"terms", terms}}.dump(2);
}

namespace {

cplx complex_entry(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    if (v.is_object()) return {v.value("re", 0.0), v.value("im", 0.0)};
    throw std::invalid_argument("HoloFun JSON: complex entries are numbers, [re, im] pairs or {re, im} objects");
}

}  // namespace

HoloFun holofun_from_json(const std::string& text, int dim_hint) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("HoloFun JSON: ") + e.what());
    }
    if (!doc.contains("terms") || !doc["terms"].is_array()) throw std::invalid_argument("HoloFun JSON: missing terms");
    int dim = doc.value("dim", dim_hint);
    if (dim == 0) {
        for (const auto& t : doc["terms"]) {
            if (t.contains("pole")) dim = static_cast<int>(t["pole"].size());
            else if (t.contains("multi_index")) dim = static_cast<int>(t["multi_index"].size());
            if (dim) break;
        }
    }
    if (dim == 0) throw std::invalid_argument("HoloFun JSON: cannot infer dimension");
    HoloFun f(dim);
    try {
        for (const auto& t : doc["terms"]) {
            const std::string kind = t.at("kind").get<std::string>();
            const cplx c(t.value("coeff_re", 0.0), t.value("coeff_im", 0.0));
            if (kind == "monomial" || kind == "constant") {
                Monomial m{{}, c};
                if (t.contains("multi_index") && !t["multi_index"].empty()) {
                    const auto& idx = t["multi_index"];
                    if (static_cast<int>(idx.size()) != dim)
                        throw std::invalid_argument("HoloFun JSON: multi_index length must equal dim");
                    for (int k = 0; k < dim; ++k) m.index[k] = idx[k].get<int>();
                }
                f.add(m);
            } else if (kind == "kernel" || kind == "kernel_power") {
                const auto& p = t.at("pole");
                if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("HoloFun JSON: pole length must equal dim");
                CVector a(dim);
                for (int k = 0; k < dim; ++k) a[k] = complex_entry(p[k]);
                f.add(KernelTerm{a, t.at("exponent").get<double>(), t.value("power", 0), c});
            } else {
                throw std::invalid_argument("HoloFun JSON: unknown term kind '" + kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("HoloFun JSON: ") + e.what());
    }
    return f;
}

}  // namespace bergman
