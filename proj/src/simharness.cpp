#include "blocksel/simharness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "blocksel/cluster.hpp"
#include "blocksel/modelselect.hpp"
#include "blocksel/parallel.hpp"
#include "blocksel/rng.hpp"

namespace blocksel {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '-' || c == '_' || c == ' '; }), s.end());
    return s;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> point_fractions(const GridPoint& p) {
    if (!p.fractions.empty()) return p.fractions;
    return std::vector<double>(static_cast<std::size_t>(p.K), 1.0 / p.K);
}

Matrix point_omega(const GridPoint& p) {
    if (p.omega) return *p.omega;
    if (p.beta) return homophily_omega(p.K, *p.beta);
    throw std::invalid_argument("grid point needs omega or beta");
}

int restarts_for(const ExperimentSpec& spec, Method m) {
    if (spec.restarts > 0) return spec.restarts;
    return (m == Method::Q2 || m == Method::Q3) ? kDefaultSubspaceRestarts : kDefaultQ1Restarts;
}

}  // namespace

std::string to_string(Study s) {
    switch (s) {
        case Study::CommDetSBM: return "CommDetSBM";
        case Study::CommDetDCBM: return "CommDetDCBM";
        case Study::CommDetPABM: return "CommDetPABM";
        case Study::TestSbmVsDcbm: return "TestSbmVsDcbm";
        case Study::TestDcbmVsPabm: return "TestDcbmVsPabm";
    }
    return "?";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Q1: return "Q1";
        case Method::Q2: return "Q2";
        case Method::Q3: return "Q3";
        case Method::SCL: return "SC-L";
        case Method::RSCL: return "RSC-L";
        case Method::OSC: return "OSC";
    }
    return "?";
}

std::string to_string(TableLayout t) { return "table" + std::to_string(static_cast<int>(t) + 1); }

Study parse_study(const std::string& s) {
    for (Study st : {Study::CommDetSBM, Study::CommDetDCBM, Study::CommDetPABM, Study::TestSbmVsDcbm, Study::TestDcbmVsPabm})
        if (lower(to_string(st)) == lower(s)) return st;
    throw std::invalid_argument("unknown study '" + s + "'");
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::Q1, Method::Q2, Method::Q3, Method::SCL, Method::RSCL, Method::OSC})
        if (lower(to_string(m)) == lower(s)) return m;
    throw std::invalid_argument("unknown method '" + s + "'");
}

TableLayout parse_table_layout(const std::string& s) {
    const std::string t = lower(s);
    for (int i = 0; i < 7; ++i) {
        const std::string num = std::to_string(i + 1);
        if (t == "table" + num || t == "papertable" + num || t == num) return static_cast<TableLayout>(i);
    }
    throw std::invalid_argument("unknown table layout '" + s + "'");
}

Model study_truth(Study study, const GridPoint& point) {
    switch (study) {
        case Study::CommDetSBM: return Model::SBM;
        case Study::CommDetDCBM: return Model::DCBM;
        case Study::CommDetPABM: return Model::PABM;
        default: return point.truth;
    }
}

MetricKind metric_kind(Study study) {
    return (study == Study::TestSbmVsDcbm || study == Study::TestDcbmVsPabm) ? MetricKind::RejectionRate
                                                                             : MetricKind::MislabelRate;
}

std::vector<Method> resolved_methods(const ExperimentSpec& spec) {
    if (!spec.methods.empty()) return spec.methods;
    switch (spec.study) {
        case Study::CommDetSBM: return {Method::Q1, Method::SCL};
        case Study::CommDetDCBM: return {Method::Q2, Method::RSCL};
        case Study::CommDetPABM: return {Method::Q3, Method::OSC};
        case Study::TestSbmVsDcbm: return {Method::Q1};
        case Study::TestDcbmVsPabm: return {Method::Q2};
    }
    return {};
}

void validate(const ExperimentSpec& spec) {
    if (spec.n_replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (spec.grid.empty()) throw std::invalid_argument("experiment has no grid points");
    if (metric_kind(spec.study) == MetricKind::RejectionRate) {
        if (spec.bootstrap < 1) throw std::invalid_argument("bootstrap must be >= 1");
        if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
        for (Method m : resolved_methods(spec)) {
            const Method want = spec.study == Study::TestSbmVsDcbm ? Method::Q1 : Method::Q2;
            if (m != want) throw std::invalid_argument("study " + to_string(spec.study) + " only runs method " + to_string(want));
        }
    }
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        const GridPoint& p = spec.grid[i];
        const std::string where = "grid point " + std::to_string(i + 1) + ": ";
        if (p.n < 2 || p.K < 1 || p.K > p.n) throw std::invalid_argument(where + "need 1 <= K <= n and n >= 2");
        const Model truth = study_truth(spec.study, p);
        if (truth == Model::PABM) {
            if (p.n % p.K != 0) throw std::invalid_argument(where + "PABM needs n divisible by K");
        } else {
            if (!p.omega && !p.beta) throw std::invalid_argument(where + "needs omega or beta");
            if (p.omega && (p.omega->rows() != p.K || p.omega->cols() != p.K))
                throw std::invalid_argument(where + "omega must be K x K");
            if (!p.fractions.empty() && static_cast<int>(p.fractions.size()) != p.K)
                throw std::invalid_argument(where + "fractions must have K entries");
        }
        if (truth == Model::DCBM && p.theta.kind == ThetaLaw::Kind::Constant && p.theta.a != 1.0)
            throw std::invalid_argument(where + "constant theta must be 1");
        for (Method m : resolved_methods(spec)) {
            const bool needs_square = m == Method::Q3 || m == Method::OSC;
            if (needs_square && p.K * p.K > p.n) throw std::invalid_argument(where + to_string(m) + " needs K^2 <= n");
        }
    }
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    double sum = 0.0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++s.count;
        }
    if (s.count == 0) return {kNaN, kNaN, 0};
    s.mean = sum / s.count;
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values)
            if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / (s.count - 1)) / std::sqrt(static_cast<double>(s.count));
    }
    return s;
}

std::uint64_t graph_seed(const ExperimentSpec& spec, std::size_t point, int replicate) {
    return derive_seed(spec.base_seed, {point, static_cast<std::uint64_t>(replicate)});
}

std::uint64_t method_seed(const ExperimentSpec& spec, std::size_t point, int replicate, Method method) {
    return derive_seed(spec.base_seed, {point, static_cast<std::uint64_t>(replicate), 1000 + static_cast<std::uint64_t>(method)});
}

TruthGraph generate_point(const ExperimentSpec& spec, std::size_t point, std::uint64_t seed) {
    const GridPoint& p = spec.grid.at(point);
    switch (study_truth(spec.study, p)) {
        case Model::SBM: {
            auto gen = gen_sbm(p.n, point_fractions(p), point_omega(p), p.target, seed);
            return {std::move(gen.graph), std::move(gen.params.labels)};
        }
        case Model::DCBM: {
            auto gen = gen_dcbm(p.n, point_fractions(p), point_omega(p), p.theta, p.target, seed, p.clamp);
            return {std::move(gen.graph), std::move(gen.params.labels)};
        }
        case Model::PABM: {
            std::optional<double> density;
            if (p.target.kind == SparsityTarget::Kind::Density) density = p.target.value;
            if (p.target.kind == SparsityTarget::Kind::AvgDegree) density = p.target.value / (p.n - 1.0);
            auto gen = gen_pabm(p.n, p.K, density, seed);
            return {std::move(gen.graph), std::move(gen.params.labels)};
        }
    }
    throw std::logic_error("unreachable");
}

double evaluate_method(const ExperimentSpec& spec, std::size_t point, int replicate, Method method,
                       const TruthGraph& truth) {
    const GridPoint& p = spec.grid.at(point);
    const std::uint64_t seed = method_seed(spec, point, replicate, method);
    const int restarts = restarts_for(spec, method);
    const Graph& g = truth.graph;

    if (metric_kind(spec.study) == MetricKind::RejectionRate) {
        TestOptions opt;
        opt.replicates = spec.bootstrap;
        opt.alpha = spec.alpha;
        opt.restarts = spec.restarts;
        opt.seed = seed;
        auto result = spec.study == Study::TestSbmVsDcbm ? test_sbm_vs_dcbm(g, p.K, opt).first
                                                         : test_dcbm_vs_pabm(g, p.K, opt).first;
        return result.rejected ? 1.0 : 0.0;
    }

    ClusterSolution sol;
    switch (method) {
        case Method::Q1: sol = minimize_q1(ase(g, p.K).rows, p.K, restarts, seed); break;
        case Method::Q2: sol = minimize_q_subspace(ase(g, p.K).rows, p.K, 1, restarts, seed); break;
        case Method::Q3: sol = minimize_q_subspace(ase(g, p.K * p.K).rows, p.K, p.K, restarts, seed); break;
        case Method::SCL: sol = sc_l(g, p.K, restarts, seed); break;
        case Method::RSCL: sol = rsc_l(g, p.K, restarts, seed); break;
        case Method::OSC: sol = osc(g, p.K, restarts, seed); break;
    }
    return mislabel_rate(sol.labels, truth.labels, p.K);
}

double run_replicate(const ExperimentSpec& spec, std::size_t point, int replicate, Method method) {
    TruthGraph truth = generate_point(spec, point, graph_seed(spec, point, replicate));
    return evaluate_method(spec, point, replicate, method, truth);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    validate(spec);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.spec = spec;
    report.metric = metric_kind(spec.study);
    report.methods = resolved_methods(spec);

    const std::size_t P = spec.grid.size();
    const auto R = static_cast<std::size_t>(spec.n_replicates);
    const std::size_t M = report.methods.size();
    report.points.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        auto& pr = report.points[p];
        pr.graph_seeds.resize(R);
        pr.realized_density.assign(R, kNaN);
        pr.realized_avg_degree.assign(R, kNaN);
        pr.cells.resize(M);
        for (std::size_t m = 0; m < M; ++m) {
            pr.cells[m].method = report.methods[m];
            pr.cells[m].values.assign(R, kNaN);
            pr.cells[m].errors.assign(R, "");
        }
    }

    // Each task writes only its own (point, replicate) slots.
    parallel_for(P * R, spec.threads, [&](std::size_t task) {
        const std::size_t p = task / R;
        const int rep = static_cast<int>(task % R);
        auto& pr = report.points[p];
        pr.graph_seeds[static_cast<std::size_t>(rep)] = graph_seed(spec, p, rep);
        TruthGraph truth;
        try {
            truth = generate_point(spec, p, pr.graph_seeds[static_cast<std::size_t>(rep)]);
            pr.realized_density[static_cast<std::size_t>(rep)] = density(truth.graph);
            pr.realized_avg_degree[static_cast<std::size_t>(rep)] = avg_degree(truth.graph);
        } catch (const std::exception& e) {
            for (auto& cell : pr.cells) cell.errors[static_cast<std::size_t>(rep)] = std::string("generation: ") + e.what();
            return;
        }
        for (std::size_t m = 0; m < M; ++m) {
            auto& cell = pr.cells[m];
            try {
                cell.values[static_cast<std::size_t>(rep)] = evaluate_method(spec, p, rep, cell.method, truth);
            } catch (const std::exception& e) {
                cell.errors[static_cast<std::size_t>(rep)] = e.what();
            }
        }
    });

    for (auto& pr : report.points) {
        for (auto& cell : pr.cells) {
            Summary s = summarize(cell.values);
            cell.mean = s.mean;
            cell.se = s.se;
            cell.failures = static_cast<int>(R) - s.count;
            cell.failed = cell.failures * 10 > static_cast<int>(R);
        }
    }
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

nlohmann::ordered_json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); }

nlohmann::ordered_json to_json(const GridPoint& p, Study study) {
    nlohmann::ordered_json j;
    j["model"] = to_string(study_truth(study, p));
    j["n"] = p.n;
    j["K"] = p.K;
    if (!p.fractions.empty()) j["fractions"] = p.fractions;
    if (p.omega) {
        auto rows = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < p.omega->rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(p.omega->cols()));
            for (Eigen::Index k = 0; k < p.omega->cols(); ++k) row[static_cast<std::size_t>(k)] = (*p.omega)(i, k);
            rows.push_back(row);
        }
        j["omega"] = rows;
    }
    if (p.beta) j["beta"] = *p.beta;
    switch (p.target.kind) {
        case SparsityTarget::Kind::Density: j["density"] = p.target.value; break;
        case SparsityTarget::Kind::AvgDegree: j["avg_degree"] = p.target.value; break;
        case SparsityTarget::Kind::None: break;
    }
    switch (p.theta.kind) {
        case ThetaLaw::Kind::Beta: j["theta"] = {{"law", "beta"}, {"a", p.theta.a}, {"b", p.theta.b}}; break;
        case ThetaLaw::Kind::PowerLaw: j["theta"] = {{"law", "powerlaw"}, {"xmin", p.theta.a}, {"alpha", p.theta.b}}; break;
        case ThetaLaw::Kind::Constant: break;
    }
    if (study_truth(study, p) == Model::DCBM) j["clamp"] = p.clamp;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["study"] = to_string(spec.study);
    j["replicates"] = spec.n_replicates;
    j["bootstrap"] = spec.bootstrap;
    j["alpha"] = spec.alpha;
    j["restarts"] = spec.restarts;
    j["seed"] = spec.base_seed;
    auto methods = nlohmann::ordered_json::array();
    for (Method m : resolved_methods(spec)) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["threads"] = spec.threads;
    if (spec.layout) j["layout"] = to_string(*spec.layout);
    auto grid = nlohmann::ordered_json::array();
    for (const auto& p : spec.grid) grid.push_back(to_json(p, spec.study));
    j["grid"] = grid;
    return j;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["spec"] = to_json(report.spec);
    j["metric"] = report.metric == MetricKind::MislabelRate ? "mislabel_rate" : "rejection_rate";
    j["runtime_seconds"] = report.runtime_seconds;
    auto points = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < report.points.size(); ++p) {
        const auto& pr = report.points[p];
        nlohmann::ordered_json jp;
        jp["point"] = p + 1;
        jp["graph_seeds"] = pr.graph_seeds;
        auto dens = nlohmann::ordered_json::array();
        for (double v : pr.realized_density) dens.push_back(finite_or_null(v));
        jp["realized_density"] = dens;
        auto cells = nlohmann::ordered_json::array();
        for (const auto& c : pr.cells) {
            nlohmann::ordered_json jc;
            jc["method"] = to_string(c.method);
            jc["mean"] = finite_or_null(c.mean);
            jc["se"] = finite_or_null(c.se);
            jc["failures"] = c.failures;
            jc["failed"] = c.failed;
            auto vals = nlohmann::ordered_json::array();
            for (double v : c.values) vals.push_back(finite_or_null(v));
            jc["values"] = vals;
            std::vector<std::uint64_t> seeds;
            for (int r = 0; r < static_cast<int>(pr.graph_seeds.size()); ++r) seeds.push_back(method_seed(report.spec, p, r, c.method));
            jc["method_seeds"] = seeds;
            auto errs = nlohmann::ordered_json::object();
            for (std::size_t r = 0; r < c.errors.size(); ++r)
                if (!c.errors[r].empty()) errs[std::to_string(r)] = c.errors[r];
            jc["errors"] = errs;
            cells.push_back(jc);
        }
        jp["cells"] = cells;
        points.push_back(jp);
    }
    j["points"] = points;
    return j;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "point,model,n,K,beta,density,avg_degree,method,mean,se,replicates,failures\n";
    const auto old = out.precision(10);
    auto opt = [&out](const std::optional<double>& v) {
        if (v) out << *v;
        else out << "NA";
    };
    for (std::size_t p = 0; p < report.points.size(); ++p) {
        const GridPoint& g = report.spec.grid[p];
        for (const auto& c : report.points[p].cells) {
            out << p + 1 << ',' << to_string(study_truth(report.spec.study, g)) << ',' << g.n << ',' << g.K << ',';
            opt(g.beta);
            out << ',';
            opt(g.target.kind == SparsityTarget::Kind::Density ? std::optional<double>(g.target.value) : std::nullopt);
            out << ',';
            opt(g.target.kind == SparsityTarget::Kind::AvgDegree ? std::optional<double>(g.target.value) : std::nullopt);
            out << ',' << to_string(c.method) << ',';
            if (std::isfinite(c.mean)) out << c.mean; else out << "NA";
            out << ',';
            if (std::isfinite(c.se)) out << c.se; else out << "NA";
            out << ',' << c.values.size() << ',' << c.failures << '\n';
        }
    }
    out.precision(old);
}

}  // namespace blocksel
