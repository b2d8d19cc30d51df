#pragma once

// Maximal, area, tent and Hardy-Littlewood type functionals over Bergman
// balls, the weighted Bergman kernel and projection, and the four vector
// valued kernels whose values live in E = L^q(D(0,gamma), tau).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bergman/holo.hpp"
#include "bergman/measure.hpp"

namespace bergman {

enum class FunctionalKind { Maximal, MaximalK, AreaRadial, AreaGrad, AreaInvGrad, Tent, TentSup, HLMax, AreaRadialK };

struct FunctionalSelector {
    FunctionalKind kind = FunctionalKind::Maximal;
    double gamma = 1.0;
    double q = 2.0;
    int k = 0;           ///< derivative order for MaximalK, AreaRadialK and HLMax
    double alpha = 0.0;  ///< weight of the averages in HLMax

    static FunctionalSelector maximal(double gamma) { return {FunctionalKind::Maximal, gamma, 2.0, 0, 0.0}; }
    static FunctionalSelector maximal_k(double gamma, int k) { return {FunctionalKind::MaximalK, gamma, 2.0, k, 0.0}; }
    static FunctionalSelector area_radial(double gamma, double q) { return {FunctionalKind::AreaRadial, gamma, q, 1, 0.0}; }
    static FunctionalSelector area_grad(double gamma, double q) { return {FunctionalKind::AreaGrad, gamma, q, 1, 0.0}; }
    static FunctionalSelector area_invgrad(double gamma, double q) { return {FunctionalKind::AreaInvGrad, gamma, q, 0, 0.0}; }
    static FunctionalSelector tent(double gamma, double q) { return {FunctionalKind::Tent, gamma, q, 0, 0.0}; }
    static FunctionalSelector tent_sup(double gamma) { return {FunctionalKind::TentSup, gamma, 2.0, 0, 0.0}; }
    static FunctionalSelector hl_max(double gamma, double q, double alpha, int k = 0) {
        return {FunctionalKind::HLMax, gamma, q, k, alpha};
    }
    static FunctionalSelector area_radial_k(double gamma, double q, int k) {
        return {FunctionalKind::AreaRadialK, gamma, q, k, 0.0};
    }

    bool is_supremum() const;
    /// Short stable label, e.g. "area-radial-k(gamma=1,q=2,k=2)".
    std::string label() const;
    void validate() const;
};

/// Points of D(0, gamma) distributed as tau, each carrying weight `weight`.
struct InnerNodes {
    double gamma = 1.0;
    std::vector<CVector> points;
    double weight = 0.0;

    static InnerNodes draw(int n, double gamma, std::size_t count, std::uint64_t seed, std::uint64_t stream);
};

struct FunctionalOptions {
    std::size_t inner_nodes = 512;
    std::size_t hl_centers = 256;
    std::size_t hl_inner = 64;
    int ascent_levels = 6;             ///< 0 disables the local ascent after the node search
    bool numeric_invariant_gradient = true;
    std::uint64_t seed = 0;
    std::uint64_t stream = stream_tag("functional");
};

/// Evaluates one functional of one function at many points. Derivatives and
/// node sets are prepared once; evaluation is thread safe.
class FunctionalEvaluator {
public:
    FunctionalEvaluator(const FunctionalSelector& sel, const HoloFun& f, const FunctionalOptions& opt = {});
    /// Uses caller-supplied inner nodes; only nodes with |w| < tanh(sel.gamma) take part.
    FunctionalEvaluator(const FunctionalSelector& sel, const HoloFun& f, InnerNodes nodes, const FunctionalOptions& opt);

    double operator()(const CVector& z) const;
    /// The pointwise integrand or supremand (|f|, (1-|w|^2)|Rf|, ...).
    double density(const CVector& w) const;
    const FunctionalSelector& selector() const { return sel_; }

private:
    double supremum(const CVector& z) const;
    double average(const CVector& z) const;
    double hl_max(const CVector& z) const;

    FunctionalSelector sel_;
    FunctionalOptions opt_;
    int n_;
    double radius_;
    HoloFun f_;
    HoloFun derived_;
    std::optional<GradientField> grad_;
    InnerNodes inner_;
    std::vector<CVector> centers_;
};

double apply_functional(const FunctionalSelector& sel, const HoloFun& f, const CVector& z,
                        const FunctionalOptions& opt = {});

// ---------------------------------------------------------------------------
// Bergman kernel and projection

/// K_alpha(z,w) = (1 - <z,w>)^-(n+1+alpha). Exactly Hermitian.
cplx bergman_kernel(double alpha, const CVector& z, const CVector& w);

using ScalarField = std::function<cplx(const CVector&)>;

/// Monte-Carlo P_alpha f(z) = int K_alpha(z,w) f(w) dv_alpha(w).
Estimate bergman_project(const ScalarField& f, double alpha, const CVector& z, const QuadSpec& spec);

// ---------------------------------------------------------------------------
// Vector-valued kernels

enum class VectorKernel { Tent, Radial, Grad, InvGrad };

struct VectorKernelId {
    VectorKernel kind = VectorKernel::Tent;
    double alpha = 0.0;
    double gamma = 1.0;
    double q = 2.0;
    std::string label() const;
};

/// K(z,u)(w) for one fibre point w in D(0,gamma); scalar kernels return a 1-vector.
CVector kernel_value(const VectorKernelId& id, const CVector& z, const CVector& u, const CVector& w);

/// [T f(z)](w) from the closed forms (f o phi_z, (1-|x|^2) Rf(x), ...).
CVector kernel_fiber(const VectorKernelId& id, const HoloFun& f, const CVector& z, const CVector& w);

/// [T f(z)](w) = int K(z,u)(w) f(u) dv_alpha(u), by quadrature over u.
std::vector<Estimate> kernel_fiber_by_integration(const VectorKernelId& id, const HoloFun& f, const CVector& z,
                                                  const CVector& w, const QuadSpec& spec);

/// ||T f(z)||_E from the closed-form fibre on a fixed node set of D(0, gamma).
double vector_kernel_apply(const VectorKernelId& id, const HoloFun& f, const CVector& z, const InnerNodes& nodes);

/// ||K(z,u)||_E on a node set.
double kernel_e_norm(const VectorKernelId& id, const CVector& z, const CVector& u, const InnerNodes& nodes);
double kernel_e_norm_difference(const VectorKernelId& id, const CVector& z1, const CVector& u1, const CVector& z2,
                                const CVector& u2, const InnerNodes& nodes);

struct KernelConstant {
    double constant = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

struct PointPair {
    CVector z, u;
};
struct PointTriple {
    CVector z, u, zeta;
};

/// Pairs with z from v_0 and u either from v_0 or a small Moebius perturbation of z.
std::vector<PointPair> sample_pairs(int n, std::size_t count, std::uint64_t seed);
/// Triples with zeta and z from v_0 and u a small perturbation of zeta.
std::vector<PointTriple> sample_triples(int n, std::size_t count, std::uint64_t seed);

/// max |K_alpha(z,u)| rho(z,u)^(n+1+alpha).
KernelConstant kernel_size_check(double alpha, const std::vector<PointPair>& pairs);
/// max ||K(z,u)||_E rho(z,u)^(n+1+alpha).
KernelConstant kernel_size_check(const VectorKernelId& id, const std::vector<PointPair>& pairs, const InnerNodes& nodes);

/// max over triples with rho(z,zeta) > c1 rho(u,zeta) (all triples when c1 <= 0) of
///   (|K(z,u) - K(z,zeta)| + |K(u,z) - K(zeta,z)|) rho(z,zeta)^(m+1/2) / rho(u,zeta)^(1/2).
KernelConstant kernel_smoothness_check(double alpha, const std::vector<PointTriple>& triples, double c1);
KernelConstant kernel_smoothness_check(const VectorKernelId& id, const std::vector<PointTriple>& triples, double c1,
                                       const InnerNodes& nodes);
/// Same with the first argument moved over D(z, gamma): sup_w |K(w,u) - K(w,zeta)|.
KernelConstant kernel_ball_smoothness_check(double alpha, double gamma, const std::vector<PointTriple>& triples,
                                            double c1, const InnerNodes& nodes);

/// The smoothness ratio along z = u = (1-eta) e_1, zeta = (1-eta) e^{i theta} e_1,
/// a family that violates the admissibility condition. Grows like eta^-(n+1+alpha).
std::vector<double> smoothness_without_filter(int n, double alpha, const std::vector<double>& etas, double theta = 1.0);

}  // namespace bergman
