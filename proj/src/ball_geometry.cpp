#include "bergman/ball_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bergman {

cplx herm_inner(std::span<const cplx> z, std::span<const cplx> w) {
    if (z.size() != w.size()) throw std::invalid_argument("herm_inner: dimension mismatch");
    cplx s = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) s += z[k] * std::conj(w[k]);
    return s;
}

bool is_interior(const CVector& z) { return z.norm() < 1.0 - kBoundaryGuard; }

BallPoint::BallPoint(const CVector& coords) : coords_(coords) {
    if (!is_interior(coords_)) throw std::domain_error("BallPoint: |z| must be < 1");
}

Automorphism::Automorphism(const BallPoint& base)
    : base_(base), norm_sq_(base.norm_sq()), s_(std::sqrt(1.0 - base.norm_sq())) {}

CVector Automorphism::apply(const CVector& w) const {
    if (w.dim() != dim()) throw std::invalid_argument("Automorphism: dimension mismatch");
    if (norm_sq_ == 0.0) return -w;
    const CVector& a = base_.coords();
    const cplx ip = herm_inner(w, a);
    const cplx proj_coeff = ip / norm_sq_;
    CVector out(dim());
    for (int k = 0; k < dim(); ++k) {
        const cplx pw = proj_coeff * a[k];
        const cplx qw = w[k] - pw;
        out[k] = a[k] - pw - s_ * qw;
    }
    out *= 1.0 / (1.0 - ip);
    return out;
}

BallPoint Automorphism::operator()(const BallPoint& w) const { return BallPoint(apply(w.coords())); }

double Automorphism::one_minus_image_norm_sq(const CVector& w) const {
    const double denom = std::norm(1.0 - herm_inner(w, base_.coords()));
    return (1.0 - norm_sq_) * (1.0 - w.norm_sq()) / denom;
}

double Automorphism::real_jacobian(const CVector& w) const {
    const double ratio = (1.0 - norm_sq_) / std::norm(1.0 - herm_inner(w, base_.coords()));
    return std::pow(ratio, dim() + 1);
}

CVector moebius_apply(const BallPoint& a, const CVector& w) { return Automorphism(a).apply(w); }

namespace {

// Lexicographic order on coordinates, used to evaluate symmetric quantities in
// one canonical argument order so that f(z,w) == f(w,z) bit for bit.
bool lex_less(const CVector& a, const CVector& b) {
    for (int k = 0; k < a.dim(); ++k) {
        if (a[k].real() != b[k].real()) return a[k].real() < b[k].real();
        if (a[k].imag() != b[k].imag()) return a[k].imag() < b[k].imag();
    }
    return false;
}

}  // namespace

double bergman_metric(const CVector& z_in, const CVector& w_in) {
    if (z_in.dim() != w_in.dim()) throw std::invalid_argument("bergman_metric: dimension mismatch");
    const bool swap = lex_less(w_in, z_in);
    const CVector& z = swap ? w_in : z_in;
    const CVector& w = swap ? z_in : w_in;
    if (z == w) return 0.0;

    const Automorphism phi{BallPoint(z)};
    const double r = phi.apply(w).norm();
    if (r < 0.5) return 0.5 * (std::log1p(r) - std::log1p(-r));
    // 1 - r^2 from the product identity keeps full relative precision as r -> 1.
    const double x = phi.one_minus_image_norm_sq(w);
    return std::log1p(std::sqrt(1.0 - x)) - 0.5 * std::log(x);
}

double pseudo_metric_rho(const CVector& z_in, const CVector& w_in) {
    if (z_in.dim() != w_in.dim()) throw std::invalid_argument("pseudo_metric_rho: dimension mismatch");
    const bool swap = lex_less(w_in, z_in);
    const CVector& z = swap ? w_in : z_in;
    const CVector& w = swap ? z_in : w_in;
    const double nz = z.norm();
    const double nw = w.norm();
    if (nz == 0.0 || nw == 0.0) return nz + nw;
    return std::abs(nz - nw) + std::abs(1.0 - herm_inner(z, w) / (nz * nw));
}

double noniso_metric_d(const CVector& z, const CVector& zeta) {
    return std::sqrt(std::abs(1.0 - herm_inner(z, zeta)));
}

// ---------------------------------------------------------------------------

namespace {

void check_unit(const CVector& zeta) {
    if (std::abs(zeta.norm() - 1.0) > 1e-12) throw std::invalid_argument("CarlesonTube: zeta must be a unit vector");
}

}  // namespace

Region::Region(WholeBall r) : v_(r) {
    if (r.dim < 1 || r.dim > kMaxDim) throw std::invalid_argument("WholeBall: bad dimension");
}
Region::Region(BergmanBall r) : v_(std::move(r)) {
    if (!(std::get<BergmanBall>(v_).gamma > 0.0)) throw std::invalid_argument("BergmanBall: gamma must be > 0");
}
Region::Region(CarlesonTube r) : v_(std::move(r)) {
    const auto& t = std::get<CarlesonTube>(v_);
    check_unit(t.zeta);
    if (!(t.r > 0.0)) throw std::invalid_argument("CarlesonTube: r must be > 0");
}
Region::Region(EuclideanBall r) : v_(std::move(r)) {
    if (!(std::get<EuclideanBall>(v_).radius > 0.0)) throw std::invalid_argument("EuclideanBall: radius must be > 0");
}

int Region::dim() const {
    return std::visit(
        [](const auto& r) -> int {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WholeBall>) return r.dim;
            else if constexpr (std::is_same_v<T, BergmanBall>) return r.center.dim();
            else if constexpr (std::is_same_v<T, CarlesonTube>) return r.zeta.dim();
            else return r.center.dim();
        },
        v_);
}

bool Region::contains(const CVector& w) const {
    if (w.dim() != dim()) throw std::invalid_argument("Region::contains: dimension mismatch");
    if (!(w.norm_sq() < 1.0)) return false;
    return std::visit(
        [&](const auto& r) -> bool {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WholeBall>) {
                return true;
            } else if constexpr (std::is_same_v<T, BergmanBall>) {
                return Automorphism(r.center).apply(w).norm() < std::tanh(r.gamma);
            } else if constexpr (std::is_same_v<T, CarlesonTube>) {
                return noniso_metric_d(w, r.zeta) < r.r;
            } else {
                return (w - r.center).norm() < r.radius;
            }
        },
        v_);
}

EuclideanBall Region::bounding_ball() const {
    return std::visit(
        [](const auto& r) -> EuclideanBall {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WholeBall>) {
                return {CVector(r.dim), 1.0};
            } else if constexpr (std::is_same_v<T, BergmanBall>) {
                const auto shape = bergman_ball_shape(r.center, r.gamma);
                return {shape.center, shape.tangential_semi_axis};
            } else if constexpr (std::is_same_v<T, CarlesonTube>) {
                // Re<w,zeta> > 1 - r^2 inside the tube, so |w - zeta|^2 < 2 r^2.
                const double rad = std::sqrt(2.0) * r.r;
                if (rad >= 1.0) return {CVector(r.zeta.dim()), 1.0};
                return {r.zeta, rad};
            } else {
                return r;
            }
        },
        v_);
}

bool region_contains(const Region& region, const CVector& w) { return region.contains(w); }

BergmanBallShape bergman_ball_shape(const BallPoint& z, double gamma) {
    const double t = std::tanh(gamma);
    const double m = z.norm_sq();
    const double denom = 1.0 - t * t * m;
    BergmanBallShape s;
    s.center = ((1.0 - t * t) / denom) * z.coords();
    s.radial_semi_axis = t * (1.0 - m) / denom;
    s.tangential_semi_axis = t * std::sqrt((1.0 - m) / denom);
    return s;
}

}  // namespace bergman
