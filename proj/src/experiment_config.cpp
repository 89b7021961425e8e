#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "blocksel/error.hpp"
#include "blocksel/simharness.hpp"

namespace blocksel {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

long long to_integer(const std::string& s) {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) out.push_back(to_double(part));
    return out;
}

}  // namespace

// "a,b;c,d" rows separated by ';'.
Matrix parse_matrix_rows(const std::string& s) {
    auto rows = split(s, ';');
    if (rows.empty()) throw std::invalid_argument("empty matrix");
    std::vector<std::vector<double>> vals;
    for (const auto& r : rows) vals.push_back(to_doubles(r));
    Matrix m(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(vals[0].size()));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].size() != vals[0].size()) throw std::invalid_argument("ragged matrix rows");
        for (std::size_t j = 0; j < vals[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
    }
    return m;
}

// constant | beta(a,b) | powerlaw(xmin,exponent)
ThetaLaw parse_theta_law(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "constant" || s == "1") return ThetaLaw::constant();
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') throw std::invalid_argument("bad theta law '" + text + "'");
    const std::string name = s.substr(0, open);
    auto args = to_doubles(s.substr(open + 1, s.size() - open - 2));
    if (args.size() != 2) throw std::invalid_argument("theta law takes two arguments");
    if (name == "beta") {
        if (args[0] <= 0 || args[1] <= 0) throw std::invalid_argument("beta parameters must be positive");
        return ThetaLaw::beta(args[0], args[1]);
    }
    if (name == "powerlaw" || name == "pareto") {
        if (args[0] <= 0 || args[1] <= 1) throw std::invalid_argument("power law needs xmin > 0 and exponent > 1");
        return ThetaLaw::power_law(args[0], args[1]);
    }
    throw std::invalid_argument("unknown theta law '" + name + "'");
}

ExperimentSpec parse_experiment_config(std::istream& in) {
    ExperimentSpec spec;
    enum class Section { None, Experiment, Point } section = Section::None;
    bool saw_experiment = false;
    std::string raw;
    int line_no = 0;
    std::vector<int> point_lines;

    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']') throw std::invalid_argument("unterminated section header");
                const std::string name = trim(line.substr(1, line.size() - 2));
                if (name == "experiment") {
                    if (saw_experiment) throw std::invalid_argument("duplicate [experiment] section");
                    saw_experiment = true;
                    section = Section::Experiment;
                } else if (name == "point") {
                    spec.grid.emplace_back();
                    point_lines.push_back(line_no);
                    section = Section::Point;
                } else {
                    throw std::invalid_argument("unknown section [" + name + "]");
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (value.empty()) throw std::invalid_argument("empty value for '" + key + "'");

            if (section == Section::Experiment) {
                if (key == "study") spec.study = parse_study(value);
                else if (key == "replicates") spec.n_replicates = static_cast<int>(to_integer(value));
                else if (key == "bootstrap") spec.bootstrap = static_cast<int>(to_integer(value));
                else if (key == "alpha") spec.alpha = to_double(value);
                else if (key == "restarts") spec.restarts = static_cast<int>(to_integer(value));
                else if (key == "seed") spec.base_seed = std::stoull(value);
                else if (key == "threads") spec.threads = static_cast<int>(to_integer(value));
                else if (key == "layout") spec.layout = parse_table_layout(value);
                else if (key == "methods") {
                    spec.methods.clear();
                    for (const auto& m : split(value, ',')) spec.methods.push_back(parse_method(m));
                } else throw std::invalid_argument("unknown key '" + key + "' in [experiment]");
            } else if (section == Section::Point) {
                GridPoint& p = spec.grid.back();
                if (key == "model") p.truth = parse_model(value);
                else if (key == "n") p.n = static_cast<int>(to_integer(value));
                else if (key == "K") p.K = static_cast<int>(to_integer(value));
                else if (key == "fractions") p.fractions = to_doubles(value);
                else if (key == "omega") p.omega = parse_matrix_rows(value);
                else if (key == "beta") p.beta = to_double(value);
                else if (key == "density") {
                    if (p.target.kind == SparsityTarget::Kind::AvgDegree) throw std::invalid_argument("density and avg_degree are exclusive");
                    p.target = SparsityTarget::density(to_double(value));
                } else if (key == "avg_degree") {
                    if (p.target.kind == SparsityTarget::Kind::Density) throw std::invalid_argument("density and avg_degree are exclusive");
                    p.target = SparsityTarget::avg_degree(to_double(value));
                } else if (key == "theta") p.theta = parse_theta_law(value);
                else if (key == "clamp") {
                    if (value == "true" || value == "1") p.clamp = true;
                    else if (value == "false" || value == "0") p.clamp = false;
                    else throw std::invalid_argument("clamp must be true or false");
                }
                else throw std::invalid_argument("unknown key '" + key + "' in [point]");
            } else {
                throw std::invalid_argument("key outside of a section");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!saw_experiment) throw ParseError("missing [experiment] section", line_no);

    // Grid-level problems are reported against the [point] header line.
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        ExperimentSpec one = spec;
        one.grid = {spec.grid[i]};
        try {
            validate(one);
        } catch (const std::exception& e) {
            std::string msg = e.what();
            const std::string prefix = "grid point 1: ";
            if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
            throw ParseError("[point] " + std::to_string(i + 1) + ": " + msg, point_lines[i]);
        }
    }
    try {
        validate(spec);
    } catch (const std::exception& e) {
        throw ParseError(e.what(), line_no);
    }
    return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    return parse_experiment_config(in);
}

}  // namespace blocksel
