#include <istream>
#include <ostream>
#include <sstream>

#include "blocksel/blockmodels.hpp"
#include "blocksel/error.hpp"

namespace blocksel {

// Format:
//   model <sbm|dcbm|pabm>
//   K <int>
//   n <int>
//   labels <n ints>
//   theta <n reals>            (dcbm)
//   clamp 1                    (dcbm with P capped at 1)
//   matrix <name> <rows> <cols> followed by one line per row
namespace {

void write_matrix_block(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
        out << '\n';
    }
}

void write_labels(std::ostream& out, const Labels& labels) {
    out << "labels";
    for (int l : labels) out << ' ' << l;
    out << '\n';
}

struct LineReader {
    std::istream& in;
    std::size_t lineno = 0;

    bool next(std::istringstream& ss) {
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
            ss = std::istringstream(line);
            return true;
        }
        return false;
    }
};

}  // namespace

void write_params(std::ostream& out, const ModelParams& params) {
    const auto old = out.precision(17);
    std::visit(
        [&out](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SbmParams>) {
                out << "model sbm\nK " << p.K << "\nn " << p.labels.size() << '\n';
                write_labels(out, p.labels);
                write_matrix_block(out, "omega", p.omega);
            } else if constexpr (std::is_same_v<T, DcbmParams>) {
                out << "model dcbm\nK " << p.K << "\nn " << p.labels.size() << '\n';
                write_labels(out, p.labels);
                out << "theta";
                for (Eigen::Index i = 0; i < p.theta.size(); ++i) out << ' ' << p.theta[i];
                out << '\n';
                if (p.clamp) out << "clamp 1\n";
                write_matrix_block(out, "omega", p.omega);
            } else {
                out << "model pabm\nK " << p.K << "\nn " << p.labels.size() << '\n';
                write_labels(out, p.labels);
                write_matrix_block(out, "lambda", p.lambda);
            }
        },
        params);
    out.precision(old);
}

ModelParams read_params(std::istream& in) {
    LineReader reader{in};
    std::istringstream ss;
    std::string model;
    int K = 0;
    std::size_t n = 0;
    Labels labels;
    Vector theta;
    Matrix omega, lambda;
    bool clamp = false;

    while (reader.next(ss)) {
        std::string key;
        ss >> key;
        if (key == "model") {
            ss >> model;
        } else if (key == "K") {
            ss >> K;
        } else if (key == "n") {
            ss >> n;
        } else if (key == "labels") {
            labels.clear();
            int l;
            while (ss >> l) labels.push_back(l);
        } else if (key == "clamp") {
            int c = 0;
            ss >> c;
            clamp = c != 0;
        } else if (key == "theta") {
            std::vector<double> v;
            double x;
            while (ss >> x) v.push_back(x);
            theta = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        } else if (key == "matrix") {
            std::string name;
            Eigen::Index rows = 0, cols = 0;
            if (!(ss >> name >> rows >> cols) || rows < 0 || cols < 0) throw ParseError("bad matrix header", reader.lineno);
            Matrix m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (!reader.next(ss)) throw ParseError("truncated matrix '" + name + "'", reader.lineno);
                for (Eigen::Index j = 0; j < cols; ++j)
                    if (!(ss >> m(i, j))) throw ParseError("short matrix row", reader.lineno);
            }
            if (name == "omega")
                omega = std::move(m);
            else if (name == "lambda")
                lambda = std::move(m);
            else
                throw ParseError("unknown matrix '" + name + "'", reader.lineno);
        } else {
            throw ParseError("unknown key '" + key + "'", reader.lineno);
        }
        if (ss.fail() && !ss.eof()) throw ParseError("bad value for '" + key + "'", reader.lineno);
    }
    if (labels.size() != n) throw ParseError("labels length does not match n");

    ModelParams out;
    switch (parse_model(model)) {
        case Model::SBM: out = SbmParams{K, omega, labels}; break;
        case Model::DCBM: out = DcbmParams{K, omega, theta, labels, clamp}; break;
        case Model::PABM: out = PabmParams{K, lambda, labels}; break;
    }
    std::visit([](const auto& p) { validate(p); }, out);
    return out;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    const auto old = out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << '\n';
    }
    out.precision(old);
}

}  // namespace blocksel
