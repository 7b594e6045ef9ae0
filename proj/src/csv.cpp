#include "mep/csv.hpp"

#include <charconv>
#include <cmath>

#include "mep/errors.hpp"

namespace mep {

std::string format_double(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += format_double(xs[i]);
    }
    return s;
}

namespace {

double parse_one(std::string_view cell, std::string_view what) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw InputError(std::string(what) + ": cannot parse '" + std::string(cell) + "' as a number");
    }
    return v;
}

}  // namespace

std::vector<double> parse_doubles(std::string_view text, std::string_view what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(parse_one(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start), what));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> Grid::points() const {
    if (steps == 1) return {lo};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        // Anchor both ends exactly.
        out.push_back(i == steps - 1 ? hi : lo + (hi - lo) * i / (steps - 1));
    }
    return out;
}

Grid parse_grid(std::string_view text) {
    const auto first = text.find(':');
    const auto second = first == text.npos ? text.npos : text.find(':', first + 1);
    if (second == text.npos) throw InputError("--grid: expected lo:hi:steps, got '" + std::string(text) + "'");
    Grid g;
    g.lo = parse_one(text.substr(0, first), "--grid lo");
    g.hi = parse_one(text.substr(first + 1, second - first - 1), "--grid hi");
    const double steps = parse_one(text.substr(second + 1), "--grid steps");
    if (steps < 1 || steps != std::floor(steps) || steps > 1e6) throw InputError("--grid: steps must be a positive integer");
    g.steps = static_cast<int>(steps);
    if (g.steps > 1 && !(g.hi > g.lo)) throw InputError("--grid: need lo < hi");
    return g;
}

}  // namespace mep
