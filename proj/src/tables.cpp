#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "blocksel/simharness.hpp"

namespace blocksel {

namespace {

enum class Col { N, K, Delta, Beta, AvgDegree, Metric };

struct Column {
    std::string header;
    Col kind;
    Method method = Method::Q1;
};

std::vector<Column> layout_columns(TableLayout layout) {
    using M = Method;
    std::vector<Column> cols = {{"n", Col::N}, {"K", Col::K}};
    auto metric = [](M m) { return Column{to_string(m), Col::Metric, m}; };
    switch (layout) {
        case TableLayout::Table1:
            cols.insert(cols.end(), {{"delta", Col::Delta}, metric(M::Q1), metric(M::SCL)});
            break;
        case TableLayout::Table2:
            cols.insert(cols.end(), {{"delta", Col::Delta}, metric(M::Q2), metric(M::RSCL)});
            break;
        case TableLayout::Table3:
            cols.insert(cols.end(), {{"delta", Col::Delta}, metric(M::Q3), metric(M::OSC)});
            break;
        case TableLayout::Table4:
        case TableLayout::Table5:
            cols.insert(cols.end(), {{"beta", Col::Beta}, {"avg. degree", Col::AvgDegree}, metric(M::Q1)});
            break;
        case TableLayout::Table6:
            cols.insert(cols.end(), {{"beta", Col::Beta}, {"avg. degree", Col::AvgDegree}, metric(M::Q2)});
            break;
        case TableLayout::Table7:
            cols.insert(cols.end(), {{"delta", Col::Delta}, metric(M::Q2)});
            break;
    }
    return cols;
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// Integers print without a fraction, everything else with two decimals.
std::string fmt_param(double v) {
    if (!std::isfinite(v)) return "NA";
    if (v == std::round(v) && std::abs(v) < 1e9) return fmt("%.0f", v);
    return fmt("%.2f", v);
}

std::string cell_text(const ExperimentReport& report, std::size_t p, const Column& col) {
    const GridPoint& g = report.spec.grid[p];
    const PointResult& pr = report.points[p];
    switch (col.kind) {
        case Col::N: return std::to_string(g.n);
        case Col::K: return std::to_string(g.K);
        case Col::Beta: return g.beta ? fmt_param(*g.beta) : "NA";
        case Col::Delta:
            if (g.target.kind == SparsityTarget::Kind::Density) return fmt_param(g.target.value);
            return fmt_param(summarize(pr.realized_density).mean);
        case Col::AvgDegree:
            if (g.target.kind == SparsityTarget::Kind::AvgDegree) return fmt_param(g.target.value);
            return fmt_param(summarize(pr.realized_avg_degree).mean);
        case Col::Metric: {
            auto it = std::find_if(pr.cells.begin(), pr.cells.end(), [&](const CellResult& c) { return c.method == col.method; });
            if (it == pr.cells.end() || it->failed || !std::isfinite(it->mean)) return "NA";
            if (report.metric == MetricKind::RejectionRate) return fmt("%.2f", it->mean);
            return fmt("%.2f ± %.3f", it->mean, std::isfinite(it->se) ? it->se : 0.0);
        }
    }
    return "NA";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Display width in code points, so the +- sign counts once.
std::size_t width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++w;
    return w;
}

}  // namespace

RenderedTable emit_table(const ExperimentReport& report, TableLayout layout) {
    const auto cols = layout_columns(layout);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    for (const auto& c : cols) header.push_back(c.header);
    rows.push_back(header);
    for (std::size_t p = 0; p < report.points.size() && p < report.spec.grid.size(); ++p) {
        std::vector<std::string> row;
        for (const auto& c : cols) row.push_back(cell_text(report, p, c));
        rows.push_back(std::move(row));
    }

    RenderedTable out;
    std::vector<std::size_t> widths(cols.size(), 0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], width(row[j]));
    std::ostringstream csv, text;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            csv << (j ? "," : "") << csv_field(row[j]);
            if (j) text << "  ";
            text << std::string(widths[j] - width(row[j]), ' ') << row[j];
        }
        csv << '\n';
        text << '\n';
    }
    out.csv = csv.str();
    out.text = text.str();
    return out;
}

}  // namespace blocksel
