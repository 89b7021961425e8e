#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "blocksel/blockmodels.hpp"
#include "blocksel/cluster.hpp"
#include "blocksel/error.hpp"
#include "blocksel/graph.hpp"
#include "blocksel/modelselect.hpp"
#include "blocksel/simharness.hpp"
#include "blocksel/spectral.hpp"

namespace fs = std::filesystem;

namespace blocksel {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input graph after optional LCC extraction, with the ids of the kept nodes.
struct LoadedGraph {
    Graph graph;
    std::vector<std::string> ids;
    std::size_t input_nodes = 0;
    std::size_t input_edges = 0;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

LoadedGraph load_graph(const std::string& path, bool lcc) {
    EdgeList el = load_edge_list_file(path);
    LoadedGraph out;
    out.input_nodes = el.graph.num_nodes();
    out.input_edges = el.graph.num_edges();
    out.self_loops_dropped = el.self_loops_dropped;
    out.duplicates_dropped = el.duplicates_dropped;
    if (!lcc) {
        out.graph = std::move(el.graph);
        out.ids = std::move(el.ids);
        return out;
    }
    Subgraph sub = largest_connected_component(el.graph);
    out.graph = std::move(sub.graph);
    for (node_t old : sub.new_to_old) out.ids.push_back(el.ids[old]);
    return out;
}

nlohmann::ordered_json input_json(const std::string& path, const LoadedGraph& g, bool lcc) {
    return {{"path", path},
            {"lcc", lcc},
            {"input_nodes", g.input_nodes},
            {"input_edges", g.input_edges},
            {"self_loops_dropped", g.self_loops_dropped},
            {"duplicates_dropped", g.duplicates_dropped},
            {"nodes", g.graph.num_nodes()},
            {"edges", g.graph.num_edges()}};
}

void make_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory '" + dir + "'");
}

// Writes via a temporary so a failed run never leaves a truncated file behind.
void write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw Error("cannot write '" + path.string() + "'");
        f << content;
        if (!f) throw Error("cannot write '" + path.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("cannot write '" + path.string() + "'");
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string summary_line(const WorkflowResult& r) {
    std::string s = "SBM " + std::string(r.test1.rejected ? "rejected" : "not rejected") + " (p≈" + fmt2(r.test1.p_value) + ")";
    if (r.test2)
        s += "; DCBM " + std::string(r.test2->rejected ? "rejected" : "not rejected") + " (p≈" + fmt2(r.test2->p_value) + ")";
    return s + "; model: " + to_string(r.selected_model);
}

std::string labels_csv(const Labels& labels, const std::vector<std::string>& ids) {
    std::ostringstream s;
    write_labels_csv(s, labels, ids);
    return s.str();
}

void check_k(int k) {
    if (k < 1) throw UsageError("--k must be a positive integer");
}

// ---- select ---------------------------------------------------------------

struct SelectArgs {
    std::string input;
    int k = 0;
    double alpha = 0.05;
    int boot = 200;
    int restarts = 0;
    std::uint64_t seed = 1;
    std::string out;
    bool lcc = false;
    int threads = 1;
    bool timings = false;
    bool corrected = false;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
    check_k(a.k);
    if (!(a.alpha > 0 && a.alpha < 1)) throw UsageError("--alpha must lie in (0,1)");
    if (a.boot < 1) throw UsageError("--boot must be positive");
    LoadedGraph g = load_graph(a.input, a.lcc);

    TestOptions opt;
    opt.replicates = a.boot;
    opt.alpha = a.alpha;
    opt.restarts = a.restarts;
    opt.seed = a.seed;
    opt.threads = a.threads;
    opt.corrected_p_value = a.corrected;
    WorkflowResult r = run_workflow(g.graph, a.k, opt);

    nlohmann::ordered_json report;
    report["command"] = "select";
    report["config"] = {{"k", a.k},           {"alpha", a.alpha},       {"boot", a.boot},
                        {"restarts", a.restarts}, {"seed", a.seed},       {"threads", a.threads},
                        {"corrected_p_value", a.corrected}};
    report["input"] = input_json(a.input, g, a.lcc);
    report["result"] = to_json(r, a.timings);
    report["summary"] = summary_line(r);

    make_dir(a.out);
    write_file(fs::path(a.out) / "report.json", report.dump(2) + "\n");
    write_file(fs::path(a.out) / "labels.csv", labels_csv(r.labels, g.ids));
    out << summary_line(r) << '\n';
    return kExitOk;
}

// ---- cluster --------------------------------------------------------------

struct ClusterArgs {
    std::string input;
    int k = 0;
    std::string model = "sbm";
    int restarts = 0;
    std::uint64_t seed = 1;
    std::optional<std::string> truth;
    std::optional<std::string> out;
    bool lcc = false;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out, std::ostream& err) {
    check_k(a.k);
    Model model;
    try {
        model = parse_model(a.model);
    } catch (const std::exception&) {
        throw UsageError("--model must be sbm, dcbm or pabm");
    }
    LoadedGraph g = load_graph(a.input, a.lcc);
    std::optional<Labels> truth;
    if (a.truth) truth = load_labels_file(*a.truth, g.ids);
    if (static_cast<std::size_t>(a.k) > g.graph.num_nodes()) throw InfeasibleError("K exceeds the number of nodes");

    ClusterSolution sol;
    int dim = a.k;
    switch (model) {
        case Model::SBM:
            sol = minimize_q1(ase(g.graph, a.k).rows, a.k, a.restarts > 0 ? a.restarts : kDefaultQ1Restarts, a.seed);
            break;
        case Model::DCBM:
            sol = minimize_q_subspace(ase(g.graph, a.k).rows, a.k, 1, a.restarts > 0 ? a.restarts : kDefaultSubspaceRestarts, a.seed);
            break;
        case Model::PABM:
            dim = a.k * a.k;
            if (static_cast<std::size_t>(dim) > g.graph.num_nodes()) throw InfeasibleError("PABM clustering needs K^2 <= n");
            sol = minimize_q_subspace(ase(g.graph, dim).rows, a.k, a.k, a.restarts > 0 ? a.restarts : kDefaultSubspaceRestarts, a.seed);
            break;
    }
    std::optional<double> mis;
    if (truth) {
        const int K = std::max(a.k, label_count(*truth));
        mis = mislabel_rate(sol.labels, *truth, K);
    }

    if (a.out) {
        nlohmann::ordered_json report;
        report["command"] = "cluster";
        report["config"] = {{"k", a.k}, {"model", to_string(model)}, {"restarts", a.restarts}, {"seed", a.seed},
                            {"truth", a.truth ? nlohmann::ordered_json(*a.truth) : nlohmann::ordered_json(nullptr)}};
        report["input"] = input_json(a.input, g, a.lcc);
        report["embedding_dim"] = dim;
        report["objective"] = sol.objective;
        report["converged"] = sol.converged;
        report["mislabel_rate"] = mis ? nlohmann::ordered_json(*mis) : nlohmann::ordered_json(nullptr);
        make_dir(*a.out);
        write_file(fs::path(*a.out) / "report.json", report.dump(2) + "\n");
        write_file(fs::path(*a.out) / "labels.csv", labels_csv(sol.labels, g.ids));
    } else {
        write_labels_csv(out, sol.labels, g.ids);
    }
    // Keep stdout clean for the label CSV when it goes there.
    std::ostream& info = a.out ? out : err;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", sol.objective);
    info << "objective: " << buf << '\n';
    if (mis) {
        std::snprintf(buf, sizeof buf, "%.4f", *mis);
        info << "mislabel_rate: " << buf << '\n';
    }
    return kExitOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<int> threads;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    ExperimentSpec spec = load_experiment_config(a.config);
    if (a.threads) spec.threads = *a.threads;
    if (a.replicates) spec.n_replicates = *a.replicates;
    if (a.seed) spec.base_seed = *a.seed;
    validate(spec);
    ExperimentReport report = run_experiment(spec);

    nlohmann::ordered_json j = to_json(report);
    j["config_path"] = a.config;
    std::ostringstream csv;
    write_report_csv(csv, report);
    make_dir(a.out);
    write_file(fs::path(a.out) / "report.json", j.dump(2) + "\n");
    write_file(fs::path(a.out) / "report.csv", csv.str());
    if (spec.layout) {
        RenderedTable t = emit_table(report, *spec.layout);
        write_file(fs::path(a.out) / "table.csv", t.csv);
        write_file(fs::path(a.out) / "table.txt", t.text);
        out << t.text;
    } else {
        out << csv.str();
    }
    return kExitOk;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
    std::string model;
    int n = 0;
    int k = 0;
    std::optional<std::string> omega;
    std::optional<double> beta;
    std::optional<std::string> fractions;
    std::optional<double> density;
    std::optional<double> avg_degree;
    std::string theta = "constant";
    bool clamp = false;
    std::uint64_t seed = 1;
    std::string out;
};

std::vector<double> parse_fractions(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
    return v;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    Model model;
    try {
        model = parse_model(a.model);
    } catch (const std::exception&) {
        throw UsageError("model must be sbm, dcbm or pabm");
    }
    if (a.n < 2) throw UsageError("--n must be at least 2");
    check_k(a.k);
    if (a.k > a.n) throw InfeasibleError("K exceeds n");

    SparsityTarget target;
    if (a.density) target = SparsityTarget::density(*a.density);
    if (a.avg_degree) target = SparsityTarget::avg_degree(*a.avg_degree);

    Graph graph;
    ModelParams params;
    std::vector<double> fractions;
    Matrix omega;
    ThetaLaw theta;
    try {
        if (a.fractions) fractions = parse_fractions(*a.fractions);
        else fractions.assign(static_cast<std::size_t>(a.k), 1.0 / a.k);
        if (static_cast<int>(fractions.size()) != a.k) throw UsageError("--fractions needs K entries");
        if (model != Model::PABM) {
            if (a.omega) omega = parse_matrix_rows(*a.omega);
            else if (a.beta) omega = homophily_omega(a.k, *a.beta);
            else throw UsageError(to_string(model) + " needs --omega or --beta");
            if (omega.rows() != a.k || omega.cols() != a.k) throw UsageError("--omega must be K x K");
        }
        theta = parse_theta_law(a.theta);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    switch (model) {
        case Model::SBM: {
            auto gen = gen_sbm(a.n, fractions, omega, target, a.seed);
            graph = std::move(gen.graph);
            params = std::move(gen.params);
            break;
        }
        case Model::DCBM: {
            auto gen = gen_dcbm(a.n, fractions, omega, theta, target, a.seed, a.clamp);
            graph = std::move(gen.graph);
            params = std::move(gen.params);
            break;
        }
        case Model::PABM: {
            if (a.n % a.k != 0) throw InfeasibleError("PABM needs n divisible by K");
            std::optional<double> dens = a.density;
            if (a.avg_degree) dens = *a.avg_degree / (a.n - 1.0);
            auto gen = gen_pabm(a.n, a.k, dens, a.seed);
            graph = std::move(gen.graph);
            params = std::move(gen.params);
            break;
        }
    }

    // Provenance header shared by all three files.
    std::ostringstream head;
    head << "# blocksel generate " << to_string(model) << " --n " << a.n << " --k " << a.k;
    if (a.omega) head << " --omega " << *a.omega;
    if (a.beta) head << " --beta " << *a.beta;
    if (a.fractions) head << " --fractions " << *a.fractions;
    if (a.density) head << " --density " << *a.density;
    if (a.avg_degree) head << " --avg-degree " << *a.avg_degree;
    if (model == Model::DCBM) head << " --theta " << a.theta << (a.clamp ? " --clamp" : "");
    head << " --seed " << a.seed << "\n# nodes " << a.n << " (isolated nodes do not appear in the edge list)\n";

    std::ostringstream edges, prm, truth;
    edges << head.str();
    write_edge_list(edges, graph);
    prm << head.str();
    write_params(prm, params);
    truth << head.str();
    const Labels& labels = std::visit([](const auto& p) -> const Labels& { return p.labels; }, params);
    for (std::size_t i = 0; i < labels.size(); ++i) truth << i << ' ' << labels[i] << '\n';

    make_dir(a.out);
    write_file(fs::path(a.out) / "graph.edges", edges.str());
    write_file(fs::path(a.out) / "params.txt", prm.str());
    write_file(fs::path(a.out) / "truth.txt", truth.str());
    out << "nodes " << graph.num_nodes() << ", edges " << graph.num_edges() << ", density " << density(graph) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral community detection and blockmodel selection"};
    app.require_subcommand(1);

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "Sequential SBM / DCBM / PABM selection on an edge list");
    select->add_option("edges", sel.input, "Edge list path")->required();
    select->add_option("--k", sel.k, "Number of communities")->required();
    select->add_option("--alpha", sel.alpha, "Test level");
    select->add_option("--boot", sel.boot, "Bootstrap replicates");
    select->add_option("--restarts", sel.restarts, "Restarts per minimization (0 = defaults)");
    select->add_option("--seed", sel.seed, "Random seed");
    select->add_option("--out", sel.out, "Output directory")->required();
    select->add_flag("--lcc", sel.lcc, "Restrict to the largest connected component");
    select->add_option("--threads", sel.threads, "Worker threads");
    select->add_flag("--timings", sel.timings, "Record stage timings in the report");
    select->add_flag("--corrected-p", sel.corrected, "Use (1 + hits) / (1 + R)");

    ClusterArgs cl;
    auto* cluster = app.add_subcommand("cluster", "Minimize Q1, Q2 or Q3 on an edge list");
    cluster->add_option("edges", cl.input, "Edge list path")->required();
    cluster->add_option("--k", cl.k, "Number of communities")->required();
    cluster->add_option("--model", cl.model, "sbm, dcbm or pabm");
    cluster->add_option("--restarts", cl.restarts, "Restarts (0 = defaults)");
    cluster->add_option("--seed", cl.seed, "Random seed");
    cluster->add_option("--truth", cl.truth, "True labels, \"node label\" lines");
    cluster->add_option("--out", cl.out, "Output directory (labels to stdout when omitted)");
    cluster->add_flag("--lcc", cl.lcc, "Restrict to the largest connected component");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a simulation study from a config file");
    simulate->add_option("config", sim.config, "Experiment config")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--threads", sim.threads, "Override the configured thread count");
    simulate->add_option("--replicates", sim.replicates, "Override the configured replicate count");
    simulate->add_option("--seed", sim.seed, "Override the configured base seed");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Sample a network from a blockmodel");
    generate->add_option("model", gen.model, "sbm, dcbm or pabm")->required();
    generate->add_option("--n", gen.n, "Number of nodes")->required();
    generate->add_option("--k", gen.k, "Number of communities")->required();
    auto* o_omega = generate->add_option("--omega", gen.omega, "Block matrix, rows separated by ';'");
    auto* o_beta = generate->add_option("--beta", gen.beta, "Omega = (1 - beta) I + beta 11^T");
    o_omega->excludes(o_beta);
    generate->add_option("--fractions", gen.fractions, "Community fractions, comma separated");
    auto* o_dens = generate->add_option("--density", gen.density, "Expected density target");
    auto* o_deg = generate->add_option("--avg-degree", gen.avg_degree, "Expected average degree target");
    o_dens->excludes(o_deg);
    generate->add_option("--theta", gen.theta, "constant, beta(a,b) or powerlaw(xmin,exponent)");
    generate->add_flag("--clamp", gen.clamp, "DCBM: cap P at 1 when the target needs it");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--out", gen.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*select) return cmd_select(sel, out);
        if (*cluster) return cmd_cluster(cl, out, err);
        if (*simulate) return cmd_simulate(sim, out);
        if (*generate) return cmd_generate(gen, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace blocksel
