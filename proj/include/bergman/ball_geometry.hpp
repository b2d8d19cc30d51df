#pragma once

// Exact geometry of the unit ball of C^n: the Hermitian pairing, Moebius
// involutions, the Bergman metric, the Coifman-Weiss pseudo-metric and the
// nonisotropic boundary distance, plus the regions used for integration.

#include <variant>

#include "bergman/cvector.hpp"

namespace bergman {

/// Points with |z| >= 1 - kBoundaryGuard are rejected so 1 - |z|^2 stays well conditioned.
inline constexpr double kBoundaryGuard = 1e-14;

/// <z, w> = sum_k z_k conj(w_k). Throws std::invalid_argument on a dimension mismatch.
cplx herm_inner(std::span<const cplx> z, std::span<const cplx> w);
inline cplx herm_inner(const CVector& z, const CVector& w) { return herm_inner(z.span(), w.span()); }

/// An interior point of the unit ball.
class BallPoint {
public:
    explicit BallPoint(const CVector& coords);
    BallPoint(std::initializer_list<cplx> coords) : BallPoint(CVector(coords)) {}

    static BallPoint origin(int dim) { return BallPoint(CVector(dim)); }

    int dim() const { return coords_.dim(); }
    const CVector& coords() const { return coords_; }
    operator const CVector&() const { return coords_; }
    const cplx& operator[](int k) const { return coords_[k]; }
    double norm() const { return coords_.norm(); }
    double norm_sq() const { return coords_.norm_sq(); }

private:
    CVector coords_;
};

/// True iff |z| < 1 - kBoundaryGuard.
bool is_interior(const CVector& z);

/// The involutive automorphism phi_a with phi_a(0) = a and phi_a(a) = 0.
///
///   phi_a(w) = (a - P_a w - s_a Q_a w) / (1 - <w, a>),   s_a = sqrt(1 - |a|^2),
///
/// where P_a is the orthogonal projection onto C a and Q_a = I - P_a. For a = 0
/// this is w -> -w.
class Automorphism {
public:
    explicit Automorphism(const BallPoint& base);

    const BallPoint& base() const { return base_; }
    int dim() const { return base_.dim(); }

    /// Raw image; callers guarantee |w| < 1.
    CVector apply(const CVector& w) const;
    BallPoint operator()(const BallPoint& w) const;

    /// 1 - |phi_a(w)|^2 via (1-|a|^2)(1-|w|^2)/|1-<w,a>|^2, accurate near the boundary.
    double one_minus_image_norm_sq(const CVector& w) const;

    /// Real Jacobian of phi_a with respect to volume: ((1-|a|^2)/|1-<w,a>|^2)^(n+1).
    double real_jacobian(const CVector& w) const;

private:
    BallPoint base_;
    double norm_sq_;
    double s_;
};

CVector moebius_apply(const BallPoint& a, const CVector& w);

/// Bergman metric beta(z,w) = atanh |phi_z(w)|. Bitwise symmetric in its arguments.
double bergman_metric(const CVector& z, const CVector& w);

/// Coifman-Weiss pseudo-metric:
///   | |z| - |w| | + |1 - <z,w>/(|z||w|)|   if z, w != 0,
///   |z| + |w|                               otherwise.
double pseudo_metric_rho(const CVector& z, const CVector& w);

/// Nonisotropic distance d(z, zeta) = |1 - <z, zeta>|^(1/2); |z|, |zeta| <= 1.
double noniso_metric_d(const CVector& z, const CVector& zeta);

// ---------------------------------------------------------------------------
// Regions

struct WholeBall {
    int dim = 1;
};

/// D(center, gamma) = { w : beta(center, w) < gamma }.
struct BergmanBall {
    BallPoint center;
    double gamma;
};

/// Q_r(zeta) = { w : d(w, zeta) < r }, zeta on the unit sphere.
struct CarlesonTube {
    CVector zeta;
    double r;
};

struct EuclideanBall {
    CVector center;
    double radius;
};

class Region {
public:
    using Variant = std::variant<WholeBall, BergmanBall, CarlesonTube, EuclideanBall>;

    Region(WholeBall r);
    Region(BergmanBall r);
    Region(CarlesonTube r);
    Region(EuclideanBall r);

    static Region whole(int dim) { return Region(WholeBall{dim}); }
    static Region bergman_ball(const BallPoint& center, double gamma) { return Region(BergmanBall{center, gamma}); }
    static Region tube(const CVector& zeta, double r) { return Region(CarlesonTube{zeta, r}); }
    static Region euclidean(const CVector& center, double radius) { return Region(EuclideanBall{center, radius}); }

    int dim() const;
    const Variant& variant() const { return v_; }

    /// Strict-inequality membership; nothing with |w| >= 1 is ever contained.
    bool contains(const CVector& w) const;

    /// A Euclidean ball containing the region (center, radius).
    EuclideanBall bounding_ball() const;

private:
    Variant v_;
};

bool region_contains(const Region& region, const CVector& w);

/// Euclidean description of D(z, gamma): it is an ellipsoid centred at
/// c = (1 - t^2) z / (1 - t^2 |z|^2) with t = tanh(gamma).
struct BergmanBallShape {
    CVector center;
    double radial_semi_axis;
    double tangential_semi_axis;
};
BergmanBallShape bergman_ball_shape(const BallPoint& z, double gamma);

}  // namespace bergman
