#include "mep/admissibility.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "mep/errors.hpp"

namespace mep {

bool spot_check_equivariance(const ProcedureSpec& proc, int k, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(1.5, 1.5);
    std::vector<double> z(static_cast<std::size_t>(k)), gz(z.size());
    std::vector<int> perm(z.size());
    for (int trial = 0; trial < trials; ++trial) {
        for (auto& x : z) x = normal(rng);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        // (gz)_i = z_{perm[i]}
        for (int i = 0; i < k; ++i) gz[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        const ActionVector a = proc(z);
        const ActionVector ga = proc(gz);
        for (int i = 0; i < k; ++i) {
            if (ga[i] != a[perm[static_cast<std::size_t>(i)]]) return false;
        }
    }
    return true;
}

std::vector<Violation> monotonicity_scan(const ProcedureSpec& proc, const LineSpec& line) {
    const int k = static_cast<int>(line.base.size());
    if (k < 2) throw PreconditionError("monotonicity_scan: needs k >= 2");
    if (line.j < 2 || line.j > k) throw PreconditionError("monotonicity_scan: j must lie in 2..k");
    if (line.resolution < 2 || !(line.hi > line.lo)) throw PreconditionError("monotonicity_scan: empty scan range");
    if (!spot_check_equivariance(proc, k)) {
        throw PreconditionError("monotonicity_scan: procedure '" + proc.name + "' is not permutation-equivariant");
    }

    struct Point {
        double tj;
        std::vector<double> z;
        int decision;
    };
    std::vector<Point> points;
    PartialSums t{line.base};
    const auto jj = static_cast<std::size_t>(line.j - 1);
    for (int i = 0; i < line.resolution; ++i) {
        const double tj = line.lo + (line.hi - line.lo) * i / (line.resolution - 1);
        t.t[jj] = tj;
        if (!in_region_s(t)) continue;
        auto z = observations_from(t);
        const int decision = proc(z)[line.j - 1] ? 1 : 0;
        points.push_back({tj, std::move(z), decision});
    }
    if (points.size() < 2) throw PreconditionError("monotonicity_scan: fewer than two points of the line lie in S");

    std::vector<Violation> out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        if (a.decision == 1 && b.decision == 0) out.push_back({line.j, a.tj, b.tj, a.z, b.z, 1, 0});
    }
    return out;
}

double default_witness_epsilon(const CriticalValues& c) {
    if (c.size() < 2) throw PreconditionError("witness: needs k >= 2");
    return (c[c.size() - 1] - c[c.size() - 2]) / 4.0;
}

WitnessPair step_up_violation_witness(const CriticalValues& c, double epsilon) {
    const int k = c.size();
    if (k < 2) throw PreconditionError("witness: needs k >= 2");
    const double gap = c[k - 1] - c[k - 2];
    if (!(epsilon > 0.0 && epsilon < gap / 2.0)) {
        throw PreconditionError("witness: epsilon must lie in (0, (C_k - C_{k-1})/2)");
    }
    WitnessPair w;
    for (int j = 0; j < k; ++j) w.z_star.push_back(c[j] - epsilon);
    w.z_bar = w.z_star;
    const double mid = 0.5 * (c[k - 1] + c[k - 2]) - epsilon;
    w.z_bar[static_cast<std::size_t>(k - 2)] = mid;
    w.z_bar[static_cast<std::size_t>(k - 1)] = mid;
    return w;
}

LineSpec witness_line(const CriticalValues& c, double epsilon, int resolution) {
    const WitnessPair w = step_up_violation_witness(c, epsilon);
    const int k = c.size();
    LineSpec line;
    line.j = k;
    line.base = partial_sums(w.z_star).t;
    line.lo = 0.5 * line.base[static_cast<std::size_t>(k - 2)];
    line.hi = w.z_star.back();
    line.resolution = resolution;
    return line;
}

}  // namespace mep
