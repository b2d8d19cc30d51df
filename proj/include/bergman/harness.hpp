#pragma once

// Verification suites and report plumbing behind the `bergman` command line.
// Every suite is a pure function of its configuration, so equal configs give
// byte-identical reports.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bergman/atoms.hpp"
#include "bergman/holo.hpp"
#include "bergman/operators.hpp"

namespace bergman {

struct ReportRow {
    std::string experiment;
    std::string params;
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

class Report {
public:
    void add(ReportRow row) { rows_.push_back(std::move(row)); }
    void append(const Report& other);
    const std::vector<ReportRow>& rows() const { return rows_; }
    bool all_pass() const;
    /// Rows whose experiment id starts with `prefix`.
    std::vector<ReportRow> select(std::string_view prefix) const;

    static constexpr std::string_view kCsvHeader = "experiment,params,lhs,lhs_se,rhs,rhs_se,ratio,pass";
    std::string csv() const;
    std::string json() const;

private:
    std::vector<ReportRow> rows_;
};

/// Shortest round-trip text for a double; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

struct ExperimentConfig {
    std::vector<int> dims{1, 2, 3};  ///< dimensions swept by the verify suites
    int n = 1;
    double alpha = 0.0;
    std::vector<double> gammas;  ///< empty: the suite's default grid
    std::vector<double> ps{2.0};
    double q = 2.0;
    std::vector<int> ks{0};
    std::optional<double> b;  ///< family exponent; n + 1 when unset
    std::vector<double> moduli{0.0, 0.5, 0.9, 0.99};
    std::size_t nodes = 0;        ///< outer quadrature nodes; 0 selects the suite default
    std::size_t inner_nodes = 0;  ///< nodes per Bergman ball; 0 selects the suite default
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::optional<double> tol;  ///< overrides the tolerance of exact checks
    double window = 10.0;
    std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
    std::size_t count = 100;
    double r_min = 0.05;
    double r_max = 0.5;
    /// Radius of the comparability windows for points of one Bergman ball.
    double comparability_gamma = 0.5;
    unsigned threads = 1;

    void validate() const;
    /// Overwrites the fields present in a JSON object; unknown keys are rejected.
    void apply_json(const std::string& text);
    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Suites

Report verify_geometry(const ExperimentConfig& cfg);
Report verify_measures(const ExperimentConfig& cfg);
Report verify_kernels(const ExperimentConfig& cfg);

/// "maximal", "maximal-k", "area-radial", "area-grad", "area-invgrad", "tent",
/// "tent-sup", "hlmax", "area-radial-k".
FunctionalKind parse_functional(std::string_view name);
std::string functional_name(FunctionalKind kind);

/// Norm-equivalence sweep over the normalised kernel family
///   f_a = (1-|a|^2)^((pb-n-1-alpha)/p) (1 - <z,a>)^-b,  a = |a| e_1,
/// one row per (p, gamma, k, |a|), one window row per (p, gamma, k), and an
/// exact row for the constant member |a| = 0 when it is in the sweep.
Report run_equivalence(const ExperimentConfig& cfg, FunctionalKind kind);

struct WeakTypePoint {
    double r = 0.0;
    double sup = 0.0;       ///< max over the lambda grid of lambda v_alpha(|P f_r| > lambda)
    double sup_se = 0.0;    ///< binomial standard error at the maximising lambda
    double lambda = 0.0;    ///< the maximising lambda
    double median = 0.0;    ///< weighted median of |P f_r|
};

/// f_r = chi_Q / v_alpha(Q) on the tube Q_r(e_1).
std::vector<WeakTypePoint> weak_type_profile(int n, double alpha, const std::vector<double>& radii,
                                             std::size_t outer_nodes, std::size_t tube_nodes, std::uint64_t seed);
/// The 48-point grid lambda_j = scale 10^(-3 + 6j/47).
std::vector<double> lambda_grid(double scale);

Report run_weak_type(const ExperimentConfig& cfg);

/// Atom conditions, projection bound and synthesis stability for a batch.
Report run_atoms(const ExperimentConfig& cfg, const AtomBatch& batch);

/// P_alpha f(at) by quadrature next to the exact value f(at).
Report run_project(const HoloFun& f, double alpha, const CVector& at, std::size_t samples, std::uint64_t seed);

enum class SpaceKind { Besov, Sobolev, HardySobolev, Hardy };

struct SpaceIndex {
    SpaceKind kind = SpaceKind::Hardy;
    double s = 0.0;     ///< smoothness (Besov, Hardy-Sobolev)
    double k = 0.0;     ///< derivative order (Sobolev)
    double beta = 0.0;  ///< weight exponent (Sobolev)
    double p = 2.0;
};

/// Weight alpha with A^p_alpha equal to the given space.
double space_index_map(const SpaceIndex& space);
SpaceKind parse_space(std::string_view name);

/// "0.1,0.2" or "0.1+0.3i,-0.2i" into a point of C^n.
CVector parse_point(std::string_view text);
std::vector<double> parse_list(std::string_view text);

}  // namespace bergman
