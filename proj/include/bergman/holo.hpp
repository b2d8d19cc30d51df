#pragma once

// Holomorphic test functions built from monomials c z^m and kernel terms
// c <z,a>^j (1 - <z,a>)^(-b). The family is closed under the partial
// derivatives and the radial derivative, so every derivative is exact.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bergman/ball_geometry.hpp"
#include "bergman/measure.hpp"

namespace bergman {

inline constexpr int kMaxDegree = 8;
inline constexpr std::size_t kMaxTerms = 64;

struct Monomial {
    std::array<int, kMaxDim> index{};
    cplx coeff{};
    int degree() const;
};

/// coeff * u^power * (1 - u)^(-exponent), u = <z, pole>.
struct KernelTerm {
    CVector pole;
    double exponent = 0.0;
    int power = 0;
    cplx coeff{};
};

class HoloFun {
public:
    explicit HoloFun(int dim);

    static HoloFun constant(int dim, cplx c);
    static HoloFun monomial(int dim, std::span<const int> index, cplx c = 1.0);
    /// (1 - <z,a>)^(-b), optionally times <z,a>^power.
    static HoloFun kernel_power(const BallPoint& pole, double b, cplx c = 1.0, int power = 0);
    /// The coordinate function z_k.
    static HoloFun coordinate(int dim, int k);

    int dim() const { return dim_; }
    const std::vector<Monomial>& monomials() const { return monomials_; }
    const std::vector<KernelTerm>& kernels() const { return kernels_; }
    std::size_t term_count() const { return monomials_.size() + kernels_.size(); }
    bool is_zero() const { return term_count() == 0; }

    HoloFun& add(const Monomial& m);
    HoloFun& add(const KernelTerm& t);
    HoloFun& operator+=(const HoloFun& g);
    HoloFun& operator*=(cplx c);
    friend HoloFun operator+(HoloFun f, const HoloFun& g) { return f += g; }
    friend HoloFun operator*(cplx c, HoloFun f) { return f *= c; }

    cplx operator()(const CVector& z) const;
    cplx evaluate(const CVector& z) const { return (*this)(z); }

    /// d/dz_k.
    HoloFun partial(int k) const;
    /// R f = sum_k z_k df/dz_k, applied `order` times.
    HoloFun radial_derivative(int order = 1) const;

    /// Largest exponent b among kernel terms (0 if none).
    double max_exponent() const;

private:
    int dim_;
    std::vector<Monomial> monomials_;
    std::vector<KernelTerm> kernels_;
};

/// The n partial derivatives of f, built once for repeated gradient evaluation.
class GradientField {
public:
    explicit GradientField(const HoloFun& f);
    CVector operator()(const CVector& z) const;
    int dim() const { return static_cast<int>(parts_.size()); }

private:
    std::vector<HoloFun> parts_;
};

CVector gradient(const HoloFun& f, const CVector& z);

/// grad(f o phi_z)(0) from the chain rule:
///   -s grad f(z) + (s - (1-|z|^2)) R f(z) conj(z) / |z|^2,  s = sqrt(1-|z|^2).
CVector invariant_gradient_exact(const CVector& grad, const CVector& z);
CVector invariant_gradient_exact(const HoloFun& f, const CVector& z);

/// Central differences of w -> f(phi_z(w)) at 0 along the real and imaginary
/// axis of every coordinate, averaged (which cancels the h^2 error term) and
/// extrapolated once from steps h and h/2. Throws std::domain_error when a
/// difference is not finite.
CVector invariant_gradient(const std::function<cplx(const CVector&)>& f, const CVector& z, double h = 1e-4);
CVector invariant_gradient(const HoloFun& f, const CVector& z, double h = 1e-4);

/// (int |f|^p dv_alpha)^(1/p) with a delta-method standard error.
Estimate bergman_norm(const HoloFun& f, double p, double alpha, const QuadSpec& spec);

/// Smallest nonnegative N with p N + alpha > -1.
int generalized_order(double p, double alpha);

/// |f(0)| + (int (1-|z|^2)^(pN) |R^N f|^p dv_alpha)^(1/p) with N from generalized_order.
Estimate generalized_norm(const HoloFun& f, double p, double alpha, const QuadSpec& spec);

struct SupEstimate {
    double value = 0.0;
    CVector argmax;
    std::size_t nodes = 0;
};

/// max |invariant gradient| over the origin and spec.node_count points drawn
/// from v_0. A lower bound for the Bloch seminorm; non-decreasing in node_count
/// for a fixed seed.
SupEstimate bloch_seminorm(const HoloFun& f, const QuadSpec& spec);

/// Growth profile of the normalised kernel family
///   (1-|a|^2)^((pb-n-1-alpha)/p) (1-<z,a>)^(-b),  |a| -> 1.
struct MembershipProfile {
    std::vector<double> moduli;
    std::vector<Estimate> pth_power;  ///< int |f_a|^p dv_alpha per modulus
    bool diverges = false;            ///< increments fail to shrink geometrically
    bool predicted_divergent = false; ///< p b <= n + 1 + alpha
};

MembershipProfile kernel_family_profile(int n, double p, double b, double alpha, const std::vector<double>& moduli,
                                        const QuadSpec& spec);

std::string to_json(const HoloFun& f);
HoloFun holofun_from_json(const std::string& text, int dim_hint = 0);

}  // namespace bergman
