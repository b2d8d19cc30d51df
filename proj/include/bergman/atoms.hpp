#pragma once

// (1,q)_alpha atoms on Carleson tubes, their Bergman projections, separated
// lattices and the Coifman-Rochberg synthesis sum
//   f(z) = sum_k c_k (1-|a_k|^2)^((pb-n-1-alpha)/p) (1 - <z,a_k>)^-b.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bergman/holo.hpp"
#include "bergman/measure.hpp"

namespace bergman {

inline constexpr int kAtomCells = 8;  // 4 angular sectors x 2 radial shells

struct AtomOptions {
    std::size_t nodes = 2000;  ///< proposals drawn for the tube node set
    /// Fixed sign pattern; drawn from the seed when empty.
    std::optional<std::array<int, kAtomCells>> signs;
};

/// a = scale (g - mean) on the tube, 0 elsewhere, with g = signs[cell(z)].
/// Mean zero and the L^q size hold exactly on the stored node set.
struct Atom {
    CVector zeta;
    double r = 0.0;
    double q = 2.0;
    double alpha = 0.0;
    std::array<int, kAtomCells> signs{};
    double mean = 0.0;
    double scale = 0.0;
    bool degenerate = false;   ///< profile constant on the tube: the zero function, not an atom
    bool exceptional = false;  ///< the constant function 1

    std::vector<Node> nodes;     ///< tube nodes with quadrature weights for v_alpha
    std::vector<double> values;  ///< a at each node
    Estimate volume;             ///< v_alpha(Q) from the node set

    static Atom constant_one(int n, double q, double alpha);

    Region tube() const { return Region::tube(zeta, r); }
    int cell(const CVector& z) const;
    double operator()(const CVector& z) const;

    /// Node-set integrals: int a dv_alpha, (int |a|^q)^(1/q), int |a|.
    double node_mean() const;
    double node_lq_norm() const;
    double node_l1_norm() const;
    /// v_alpha(Q)^(1/q - 1) for the node-set volume.
    double size_bound() const;
};

Atom make_atom(const CVector& zeta, double r, double q, double alpha, std::uint64_t seed, const AtomOptions& opt = {});

/// (P_alpha a)(z) by quadrature over the atom's node set. The exceptional atom
/// projects to 1 exactly. When alpha differs from the atom's weight the nodes
/// are reweighted by the density ratio.
cplx atom_project(const Atom& a, double alpha, const CVector& z);

/// int |P_alpha a| dv_alpha over the ball; outer nodes concentrate near the tube.
Estimate projected_l1_norm(const Atom& a, double alpha, const QuadSpec& spec);

struct Lattice {
    std::vector<CVector> points;
    double separation = 0.0;
};

/// Greedy maximal separated set in the Bergman metric. Candidates are the
/// origin followed by random points on the spheres |z| = 1 - 2^-j,
/// j = 1..strata; the candidate sequence for `strata` is a prefix of the one
/// for `strata + 1`, so counts never decrease as strata are added.
Lattice build_lattice(int n, double separation, std::size_t count_limit, std::uint64_t seed, int strata = 4);

/// n max(1, 1/p) + (alpha+1)/p; synthesis needs b strictly above it.
double synthesis_exponent_bound(int n, double p, double alpha);

/// The finite synthesis sum. Throws std::invalid_argument when b is at or
/// below the bound or the coefficient count differs from the lattice size.
HoloFun cr_synthesize(const Lattice& lattice, const std::vector<cplx>& coeffs, double b, double p, double alpha);

/// Description of a seeded batch of atoms.
struct AtomBatch {
    std::size_t count = 100;
    double q = 2.0;
    double alpha = 0.0;
    double r_min = 0.05;
    double r_max = 0.5;
    std::uint64_t seed = 0;
    int n = 1;

    void validate() const;
};

AtomBatch atom_batch_from_json(const std::string& text);
std::string to_json(const AtomBatch& batch);

/// The i-th atom of a batch: zeta uniform on the sphere, r log-uniform in the range.
Atom batch_atom(const AtomBatch& batch, std::size_t i, const AtomOptions& opt = {});

}  // namespace bergman
