// Command-line driver: assembly, symbols, spectra, iteration tables, Example 1.
#include <cblas.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "glt_stokes/experiments.hpp"

using namespace glt_stokes;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Settings {
    ExperimentConfig cfg;
    std::vector<int> n_list{8, 16, 32};
    std::vector<int> groups{1, 2, 3};
    std::vector<double> gammas{1, 10, 100};
    std::string cases = "abc";
    // Example 1
    double mu0 = 1.0, w = 0.1;
    std::vector<double> mu1_list{1, 1e2, 1e4, 1e6};
    std::vector<double> delta_list{0.0};
    std::vector<int> ex1_n{20, 40};
};

json to_json(const Settings& s) {
    const auto& c = s.cfg;
    return {{"n", c.n},
            {"group", c.group},
            {"gamma", c.gamma},
            {"case", std::string(1, c.rhs_case)},
            {"strategy", to_string(c.strategy)},
            {"tol", c.tol},
            {"restart", c.restart},
            {"maxit", c.maxit},
            {"seed", c.seed},
            {"grid", c.grid},
            {"output_dir", c.output_dir},
            {"n_list", s.n_list},
            {"groups", s.groups},
            {"gammas", s.gammas},
            {"cases", s.cases},
            {"mu0", s.mu0},
            {"w", s.w},
            {"mu1_list", s.mu1_list},
            {"delta_list", s.delta_list},
            {"example1_n", s.ex1_n}};
}

void load_config(const std::string& path, Settings& s) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j = json::parse(in);
    static const std::set<std::string> known = {"n",     "group",   "gamma",    "case",       "strategy",  "tol",
                                                "restart", "maxit", "seed",     "grid",       "output_dir", "n_list",
                                                "groups", "gammas", "cases",    "mu0",        "w",          "mu1_list",
                                                "delta_list", "example1_n"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw std::invalid_argument("unknown config key '" + it.key() + "'");
    auto& c = s.cfg;
    if (j.contains("n")) c.n = j["n"];
    if (j.contains("group")) c.group = j["group"];
    if (j.contains("gamma")) c.gamma = j["gamma"];
    if (j.contains("case")) {
        std::string v = j["case"];
        if (v.size() != 1) throw std::invalid_argument("case must be a single letter");
        c.rhs_case = v[0];
    }
    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"]);
    if (j.contains("tol")) c.tol = j["tol"];
    if (j.contains("restart")) c.restart = j["restart"];
    if (j.contains("maxit")) c.maxit = j["maxit"];
    if (j.contains("seed")) c.seed = j["seed"];
    if (j.contains("grid")) c.grid = j["grid"].get<std::array<int, 4>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"];
    if (j.contains("n_list")) s.n_list = j["n_list"].get<std::vector<int>>();
    if (j.contains("groups")) s.groups = j["groups"].get<std::vector<int>>();
    if (j.contains("gammas")) s.gammas = j["gammas"].get<std::vector<double>>();
    if (j.contains("cases")) s.cases = j["cases"];
    if (j.contains("mu0")) s.mu0 = j["mu0"];
    if (j.contains("w")) s.w = j["w"];
    if (j.contains("mu1_list")) s.mu1_list = j["mu1_list"].get<std::vector<double>>();
    if (j.contains("delta_list")) s.delta_list = j["delta_list"].get<std::vector<double>>();
    if (j.contains("example1_n")) s.ex1_n = j["example1_n"].get<std::vector<int>>();
}

void validate(const Settings& s) {
    s.cfg.validate();
    for (int n : s.n_list)
        if (n < 1 || n > 64) throw std::invalid_argument("n_list entries must lie in [1, 64]");
    for (int g : s.groups)
        if (g < 1 || g > 3) throw std::invalid_argument("groups must be drawn from {1, 2, 3}");
    for (double g : s.gammas)
        if (!(g > 0)) throw std::invalid_argument("gammas must be positive");
    for (char c : s.cases)
        if (c < 'a' || c > 'c') throw std::invalid_argument("cases must be drawn from 'abc'");
    if (!(s.mu0 > 0)) throw std::invalid_argument("mu0 must be positive");
    if (!(s.w > 0 && s.w < 1)) throw std::invalid_argument("w must lie in (0, 1)");
    for (double m : s.mu1_list)
        if (!(m > 0)) throw std::invalid_argument("mu1_list entries must be positive");
    for (double d : s.delta_list)
        if (d < 0) throw std::invalid_argument("delta_list entries must be non-negative");
}

// every output starts with the artifact version and the full config
std::string header(const Settings& s, const std::string& command) {
    std::ostringstream os;
    os << "# " << kArtifactVersion << '\n' << "# command: " << command << '\n' << "# config: " << to_json(s).dump() << '\n';
    return os.str();
}

std::ofstream open_output(const Settings& s, const std::string& name, bool append = false) {
    fs::create_directories(s.cfg.output_dir);
    fs::path p = fs::path(s.cfg.output_dir) / name;
    std::ofstream out(p, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << std::setprecision(17);
    return out;
}

void apply_thread_cap() {
    if (const char* v = std::getenv("GLT_STOKES_THREADS")) {
        int t = std::atoi(v);
        if (t < 1) throw std::invalid_argument("GLT_STOKES_THREADS must be a positive integer");
        openblas_set_num_threads(t);
        Eigen::setNbThreads(t);
    }
}

const RatSymbol& named_symbol(const std::string& name) {
    const auto& S = symbols();
    static const std::map<std::string, const RatSymbol*> table = {
        {"Ghat", &S.Ghat}, {"Ghat_pre", &S.Ghat_pre}, {"g0", &S.g0},   {"g1", &S.g1},   {"Gx", &S.Gx},
        {"Gy", &S.Gy},     {"gx0", &S.gx0},           {"gx1", &S.gx1}, {"gy0", &S.gy0}, {"gy1", &S.gy1},
        {"GxA", &S.GxA},   {"GyA", &S.GyA},           {"saddle", &S.saddle}};
    auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown symbol '" + name + "'");
    return *it->second;
}

json symbol_json(const RatSymbol& G) {
    json coeffs = json::array();
    for (const auto& [k, C] : G.coeffs) {
        json re = json::array(), im = json::array();
        for (int r = 0; r < G.s1; ++r) {
            json row = json::array(), zr = json::array();
            for (int c = 0; c < G.s2; ++c) {
                const Rat& v = C[std::size_t(r) * G.s2 + c];
                row.push_back(boost::rational_cast<double>(v));
                zr.push_back(0.0);
            }
            re.push_back(row);
            im.push_back(zr);
        }
        json kk = G.levels == 1 ? json::array({k[0]}) : json::array({k[0], k[1]});
        coeffs.push_back({{"k", kk}, {"re", re}, {"im", im}});
    }
    return {{"s1", G.s1}, {"s2", G.s2}, {"levels", G.levels}, {"coeffs", coeffs}};
}

json matrix_json(const Eigen::MatrixXcd& F) {
    json re = json::array(), im = json::array();
    for (int r = 0; r < F.rows(); ++r) {
        json a = json::array(), b = json::array();
        for (int c = 0; c < F.cols(); ++c) {
            a.push_back(F(r, c).real());
            b.push_back(F(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"re", re}, {"im", im}};
}

void write_spectrum(std::ostream& out, const SpectrumReport& rep) {
    out << "index,matrix_value,symbol_quantile\n";
    auto q = rank_aligned_quantiles(rep.matrix_values.size(), rep.symbol_samples);
    for (std::size_t i = 0; i < q.size(); ++i) out << i << ',' << rep.matrix_values[i] << ',' << q[i] << '\n';
    out << "# ks_distance=" << rep.ks_distance << '\n';
}

std::string spectrum_name(const std::string& target, const Settings& s, int n) {
    std::string g = s.cfg.group_label();
    for (char& c : g)
        if (c == '(' || c == ')' || c == '=') c = '_';
    return "spectrum_" + target + "_g" + g + "_n" + std::to_string(n) + ".csv";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taylor-Hood Stokes on the crisscross mesh: GLT symbols, spectra and tau preconditioning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    Settings s;
    std::string config_path, strategy, rhs_case;
    std::string target = "A", symbol_name = "Ghat", export_path, block = "M";
    double x = 0.5, y = 0.5, t1 = 0.0, t2 = 0.0;
    bool dump = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        sub->add_option("--n", s.cfg.n, "grid parameter");
        sub->add_option("--group", s.cfg.group, "viscosity group 1, 2 or 3");
        sub->add_option("--gamma", s.cfg.gamma, "group-3 jump value");
        sub->add_option("--output-dir", s.cfg.output_dir, "directory for CSV output");
    };
    auto krylov = [&](CLI::App* sub) {
        sub->add_option("--case", rhs_case, "right-hand side a, b or c");
        sub->add_option("--strategy", strategy, "tau_block, frozen_sparse or exact");
        sub->add_option("--tol", s.cfg.tol);
        sub->add_option("--restart", s.cfg.restart);
        sub->add_option("--maxit", s.cfg.maxit);
        sub->add_option("--seed", s.cfg.seed);
    };

    auto* mesh_info = app.add_subcommand("mesh-info", "dof counts and saddle dimension");
    common(mesh_info);
    bool dump_mesh_flag = false;
    mesh_info->add_flag("--dump", dump_mesh_flag, "print vertices and triangles");

    auto* assemble = app.add_subcommand("assemble", "assemble and export in Matrix Market format");
    common(assemble);
    assemble->add_option("--export", export_path, "output .mtx path")->required();
    assemble->add_option("--block", block, "M, A, Bx, By or Mp");

    auto* symbol = app.add_subcommand("symbol", "evaluate a symbol or dump its coefficients as JSON");
    common(symbol);
    symbol->add_option("--name", symbol_name, "Ghat, Ghat_pre, g0, g1, Gx, Gy, gx0, gx1, gy0, gy1, GxA, GyA, saddle");
    symbol->add_option("--x", x);
    symbol->add_option("--y", y);
    symbol->add_option("--t1", t1);
    symbol->add_option("--t2", t2);
    symbol->add_flag("--dump", dump, "emit coefficient tables instead of a value");

    auto* spectrum = app.add_subcommand("spectrum", "matrix spectrum against symbol samples");
    common(spectrum);
    spectrum->add_option("--target", target, "A, Bx, By or M");
    spectrum->add_option("--grid", s.cfg.grid, "nx ny ntheta1 ntheta2")->expected(4);

    auto* compare = app.add_subcommand("compare", "KS distance over a list of n");
    common(compare);
    compare->add_option("--target", target, "A, Bx, By or M");
    compare->add_option("--grid", s.cfg.grid)->expected(4);
    compare->add_option("--n-list", s.n_list);

    auto* pspec = app.add_subcommand("precond-spectrum", "singular values of the preconditioned saddle matrix");
    common(pspec);
    krylov(pspec);

    auto* solve = app.add_subcommand("solve", "one PGMRES run, appended to results.csv");
    common(solve);
    krylov(solve);
    bool unpreconditioned = false;
    solve->add_flag("--no-precond", unpreconditioned, "plain GMRES");

    auto* table = app.add_subcommand("table", "iteration table over groups, cases and n");
    common(table);
    krylov(table);
    table->add_option("--n-list", s.n_list);
    table->add_option("--groups", s.groups);
    table->add_option("--gammas", s.gammas, "group-3 values");
    table->add_option("--cases", s.cases);

    auto* example1 = app.add_subcommand("example1", "condition numbers and MINRES counts for the strip viscosity");
    example1->add_option("--config", config_path);
    example1->add_option("--output-dir", s.cfg.output_dir);
    example1->add_option("--mu0", s.mu0);
    example1->add_option("--w", s.w);
    example1->add_option("--mu1", s.mu1_list);
    example1->add_option("--delta", s.delta_list);
    example1->add_option("--n-list", s.ex1_n);
    example1->add_option("--seed", s.cfg.seed);

    // config file first, then flags: parse twice so flags win
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            Settings file;
            load_config(config_path, file);
            Settings flags = s;
            s = file;
            // re-apply only the flags actually given
            CLI::App* sub = app.get_subcommands().front();
            auto given = [&](const std::string& name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
            if (given("--n")) s.cfg.n = flags.cfg.n;
            if (given("--group")) s.cfg.group = flags.cfg.group;
            if (given("--gamma")) s.cfg.gamma = flags.cfg.gamma;
            if (given("--output-dir")) s.cfg.output_dir = flags.cfg.output_dir;
            if (given("--tol")) s.cfg.tol = flags.cfg.tol;
            if (given("--restart")) s.cfg.restart = flags.cfg.restart;
            if (given("--maxit")) s.cfg.maxit = flags.cfg.maxit;
            if (given("--seed")) s.cfg.seed = flags.cfg.seed;
            if (given("--grid")) s.cfg.grid = flags.cfg.grid;
            if (given("--n-list")) {
                s.n_list = flags.n_list;
                s.ex1_n = flags.ex1_n;
            }
            if (given("--groups")) s.groups = flags.groups;
            if (given("--gammas")) s.gammas = flags.gammas;
            if (given("--cases")) s.cases = flags.cases;
            if (given("--mu0")) s.mu0 = flags.mu0;
            if (given("--w")) s.w = flags.w;
            if (given("--mu1")) s.mu1_list = flags.mu1_list;
            if (given("--delta")) s.delta_list = flags.delta_list;
        }
        if (!strategy.empty()) s.cfg.strategy = parse_strategy(strategy);
        if (!rhs_case.empty()) {
            if (rhs_case.size() != 1) throw std::invalid_argument("--case takes a single letter");
            s.cfg.rhs_case = rhs_case[0];
        }
        validate(s);
        apply_thread_cap();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    std::string command;
    for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);

    try {
        auto& cfg = s.cfg;
        if (*mesh_info) {
            auto m = build_mesh(cfg.n);
            std::cout << "n=" << cfg.n << " velocity_dofs=" << m.velocity_count() << " pressure_dofs="
                      << m.pressure_count() << " triangles=" << m.triangles.size()
                      << " saddle_dim=" << saddle_dimension(cfg.n) << '\n';
            if (dump_mesh_flag) dump_mesh(m, std::cout);
        } else if (*assemble) {
            auto m = build_mesh(cfg.n);
            auto sys = assemble_saddle(m, cfg.viscosity());
            std::ofstream out(export_path);
            if (!out) throw std::runtime_error("cannot write " + export_path);
            out << std::setprecision(17);
            if (block == "M") write_matrix_market(sys.full(), out, true);
            else if (block == "A") write_matrix_market(sys.A, out, true);
            else if (block == "Bx") write_matrix_market(sys.Bx, out, false);
            else if (block == "By") write_matrix_market(sys.By, out, false);
            else if (block == "Mp") write_matrix_market(sys.Mp, out, true);
            else throw std::invalid_argument("--block must be M, A, Bx, By or Mp");
            std::cout << "wrote " << export_path << '\n';
        } else if (*symbol) {
            const RatSymbol& G = named_symbol(symbol_name);
            json j;
            if (dump) {
                j = symbol_json(G);
                j["name"] = symbol_name;
            } else {
                Eigen::MatrixXcd F;
                auto mu = cfg.viscosity();
                if (symbol_name == "Ghat") F = eval_A_symbol(x, y, t1, t2, mu);
                else if (symbol_name == "saddle") F = eval_saddle_symbol(x, y, t1, t2, mu);
                else F = G.eval(t1, t2);
                j = matrix_json(F);
                j["name"] = symbol_name;
                j["point"] = {x, y, t1, t2};
            }
            // JSON has no comments: provenance travels as fields
            j["version"] = kArtifactVersion;
            j["config"] = to_json(s);
            std::cout << j.dump() << '\n';
        } else if (*spectrum) {
            auto rep = adherence(parse_target(target), cfg.n, cfg.viscosity(), cfg.grid);
            auto out = open_output(s, spectrum_name(target, s, cfg.n));
            out << header(s, command);
            write_spectrum(out, rep);
            std::cout << "ks_distance=" << rep.ks_distance << '\n';
        } else if (*compare) {
            for (int n : s.n_list) {
                auto rep = adherence(parse_target(target), n, cfg.viscosity(), cfg.grid);
                auto out = open_output(s, spectrum_name(target, s, n));
                out << header(s, command);
                write_spectrum(out, rep);
                std::cout << "n=" << n << ",ks_distance=" << rep.ks_distance << '\n';
            }
        } else if (*pspec) {
            if (cfg.n > 16) throw std::invalid_argument("precond-spectrum is dense; use n <= 16");
            std::vector<double> sv;
            double frac = clustering_fraction(cfg.n, cfg.viscosity(), cfg.strategy, 0.5, 2.0, &sv);
            auto out = open_output(s, "precond_spectrum_n" + std::to_string(cfg.n) + ".csv");
            out << header(s, command) << "index,singular_value\n";
            for (std::size_t i = 0; i < sv.size(); ++i) out << i << ',' << sv[i] << '\n';
            out << "# fraction_in_[0.5,2]=" << frac << '\n';
            std::cout << "fraction_in_[0.5,2]=" << frac << '\n';
        } else if (*solve) {
            auto blk = prepare_block(cfg, !unpreconditioned);
            auto row = run_cell(blk, cfg, !unpreconditioned);
            fs::path p = fs::path(cfg.output_dir) / "results.csv";
            bool fresh = !fs::exists(p);
            auto out = open_output(s, "results.csv", true);
            if (fresh) out << header(s, command) << results_header() << '\n';
            out << format_row(row) << '\n';
            std::cout << results_header() << '\n' << format_row(row) << '\n';
        } else if (*table) {
            std::vector<ExperimentConfig> cells;
            for (int g : s.groups) {
                std::vector<double> gs = g == 3 ? s.gammas : std::vector<double>{1.0};
                for (double gamma : gs)
                    for (int n : s.n_list)
                        for (char c : s.cases) {
                            ExperimentConfig e = cfg;
                            e.group = g;
                            e.gamma = gamma;
                            e.n = n;
                            e.rhs_case = c;
                            cells.push_back(e);
                        }
            }
            auto out = open_output(s, "results.csv");
            out << header(s, command) << results_header() << '\n';
            for (const auto& row : run_group_table(cells)) {
                out << format_row(row) << '\n';
                out.flush();
                std::cout << format_row(row) << std::endl;
            }
        } else if (*example1) {
            auto out = open_output(s, "example1.csv");
            out << header(s, command)
                << "# uniform meshes on (-1,1)^2 stand in for conforming graded meshes\n"
                << "mu0,mu1,w,delta,n,condition,minres_iterations,minres_converged\n";
            for (int n : s.ex1_n)
                for (double delta : s.delta_list)
                    for (double mu1 : s.mu1_list) {
                        auto r = run_example1_cell(s.mu0, mu1, s.w, delta, n, true, cfg.seed);
                        out << r.mu0 << ',' << r.mu1 << ',' << r.w << ',' << r.delta << ',' << r.n << ',' << r.condition
                            << ',' << r.minres_iterations << ',' << (r.minres_converged ? "true" : "false") << '\n';
                        out.flush();
                        std::cout << "n=" << n << " delta=" << delta << " mu1=" << mu1 << " condition=" << r.condition
                                  << " minres=" << r.minres_iterations << std::endl;
                    }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
