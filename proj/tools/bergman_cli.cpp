// bergman: command-line front end for the verification and experiment suites.
// CSV goes to stdout; exit status is 0 iff every row passes, 1 if any row
// fails and 2 on usage or input errors.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bergman/harness.hpp"

using namespace bergman;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << text;
}

struct Outputs {
    std::string csv;
    std::string json;
    std::string config;
};

int emit(const Report& rep, const Outputs& out) {
    std::cout << rep.csv();
    if (!out.csv.empty()) write_file(out.csv, rep.csv());
    if (!out.json.empty()) write_file(out.json, rep.json());
    return rep.all_pass() ? 0 : 1;
}

void add_common(CLI::App* app, ExperimentConfig& cfg, Outputs& out) {
    app->add_option("--seed", cfg.seed, "Master seed");
    app->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--window", cfg.window, "Largest admissible max/min ratio");
    app->add_option("--config", out.config, "JSON file whose keys override the flags");
    app->add_option("--out-csv", out.csv, "Also write the CSV report here");
    app->add_option("--out-json", out.json, "Write the JSON report here");
}

void finish_config(ExperimentConfig& cfg, const Outputs& out) {
    if (!out.config.empty()) cfg.apply_json(read_file(out.config));
    cfg.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo checks of Bergman-space geometry, operators and norm equivalences"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    Outputs out;
    std::optional<int> n_flag;

    // verify
    auto* verify = app.add_subcommand("verify", "Check geometry, measures or kernels");
    std::string target;
    verify->add_option("target", target, "geometry | measures | kernels")
        ->required()
        ->check(CLI::IsMember({"geometry", "measures", "kernels"}));
    verify->add_option("--n", n_flag, "Dimension (default: sweep 1,2,3 where applicable)");
    verify->add_option("--alpha", cfg.alpha, "Weight exponent");
    verify->add_option("--gamma", cfg.gammas, "Bergman radii")->delimiter(',');
    verify->add_option("--trials", cfg.trials, "Random trials per identity");
    verify->add_option("--tol", cfg.tol, "Tolerance of exact checks");
    verify->add_option("--nodes", cfg.nodes, "Quadrature nodes");
    add_common(verify, cfg, out);

    // equiv
    auto* equiv = app.add_subcommand("equiv", "Norm equivalence on the normalised kernel family");
    std::string functional;
    equiv->add_option("--functional", functional, "maximal | maximal-k | area-radial | area-grad | area-invgrad | "
                                                  "tent | tent-sup | hlmax | area-radial-k")
        ->required();
    equiv->add_option("--n", n_flag, "Dimension");
    equiv->add_option("--p", cfg.ps, "Exponents p")->delimiter(',');
    equiv->add_option("--q", cfg.q, "Inner exponent q");
    equiv->add_option("--alpha", cfg.alpha, "Weight exponent");
    equiv->add_option("--gamma", cfg.gammas, "Bergman radii")->delimiter(',');
    equiv->add_option("--k", cfg.ks, "Derivative orders")->delimiter(',');
    equiv->add_option("--b", cfg.b, "Kernel exponent of the family (default n+1)");
    equiv->add_option("--moduli", cfg.moduli, "Pole moduli |a|")->delimiter(',');
    equiv->add_option("--nodes", cfg.nodes, "Outer quadrature nodes");
    equiv->add_option("--inner-nodes", cfg.inner_nodes, "Nodes per Bergman ball");
    equiv->add_option("--tol", cfg.tol, "Tolerance of the exact constant row");
    add_common(equiv, cfg, out);

    // atoms
    auto* atoms = app.add_subcommand("atoms", "Seeded atom batch and synthesis stability");
    std::string batch_file;
    std::vector<double> r_range;
    atoms->add_option("--n", n_flag, "Dimension");
    atoms->add_option("--q", cfg.q, "Atom exponent q > 1");
    atoms->add_option("--alpha", cfg.alpha, "Weight exponent");
    atoms->add_option("--count", cfg.count, "Number of atoms");
    atoms->add_option("--r-range", r_range, "min,max tube radius")->delimiter(',')->expected(2);
    atoms->add_option("--p", cfg.ps, "Synthesis exponent p")->delimiter(',');
    atoms->add_option("--b", cfg.b, "Synthesis kernel exponent");
    atoms->add_option("--batch", batch_file, "Atom batch JSON {count,q,alpha,r_range,seed}");
    atoms->add_option("--nodes", cfg.nodes, "Outer nodes for projected norms");
    atoms->add_option("--inner-nodes", cfg.inner_nodes, "Tube nodes per atom");
    atoms->add_option("--tol", cfg.tol, "Tolerance of the mean-zero check");
    add_common(atoms, cfg, out);

    // project
    auto* project = app.add_subcommand("project", "Bergman projection of a function at a point");
    std::string input, at_text;
    std::size_t samples = 200000;
    project->add_option("--input", input, "HoloFun JSON file")->required();
    project->add_option("--alpha", cfg.alpha, "Weight exponent");
    project->add_option("--at", at_text, "Point, e.g. \"0.1,0.2\" or \"0.1+0.2i\"")->required();
    project->add_option("--samples", samples, "Quadrature nodes")->check(CLI::PositiveNumber);
    add_common(project, cfg, out);

    // weak type
    auto* weak = app.add_subcommand("weak-type", "Weak-type (1,1) profile of P on tube indicators");
    weak->add_option("--n", n_flag, "Dimension");
    weak->add_option("--alpha", cfg.alpha, "Weight exponent");
    weak->add_option("--radii", cfg.radii, "Tube radii")->delimiter(',');
    weak->add_option("--nodes", cfg.nodes, "Outer nodes");
    weak->add_option("--inner-nodes", cfg.inner_nodes, "Tube nodes");
    weak->add_option("--tol", cfg.tol, "Tolerance of the constant-function row");
    add_common(weak, cfg, out);

    // space index
    auto* space = app.add_subcommand("space-index", "Weight alpha identifying a function space with A^p_alpha");
    std::string space_name;
    SpaceIndex idx;
    space->add_option("--space", space_name, "besov | sobolev | hardy-sobolev | hardy")->required();
    space->add_option("--s", idx.s, "Smoothness");
    space->add_option("--k", idx.k, "Derivative order");
    space->add_option("--beta", idx.beta, "Weight exponent");
    space->add_option("--p", idx.p, "Exponent p");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (n_flag) {
            cfg.n = *n_flag;
            cfg.dims = {*n_flag};
        }
        if (!r_range.empty()) {
            cfg.r_min = r_range[0];
            cfg.r_max = r_range[1];
        }

        if (verify->parsed()) {
            finish_config(cfg, out);
            if (target == "geometry") return emit(verify_geometry(cfg), out);
            if (target == "measures") return emit(verify_measures(cfg), out);
            return emit(verify_kernels(cfg), out);
        }
        if (equiv->parsed()) {
            finish_config(cfg, out);
            return emit(run_equivalence(cfg, parse_functional(functional)), out);
        }
        if (atoms->parsed()) {
            finish_config(cfg, out);
            AtomBatch batch{cfg.count, cfg.q, cfg.alpha, cfg.r_min, cfg.r_max, cfg.seed, cfg.n};
            if (!batch_file.empty()) batch = atom_batch_from_json(read_file(batch_file));
            return emit(run_atoms(cfg, batch), out);
        }
        if (project->parsed()) {
            finish_config(cfg, out);
            const HoloFun f = holofun_from_json(read_file(input));
            return emit(run_project(f, cfg.alpha, parse_point(at_text), samples, cfg.seed), out);
        }
        if (weak->parsed()) {
            finish_config(cfg, out);
            return emit(run_weak_type(cfg), out);
        }
        if (space->parsed()) {
            idx.kind = parse_space(space_name);
            std::cout << "space,s,k,beta,p,alpha\n"
                      << space_name << ',' << format_number(idx.s) << ',' << format_number(idx.k) << ','
                      << format_number(idx.beta) << ',' << format_number(idx.p) << ','
                      << format_number(space_index_map(idx)) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "bergman: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
