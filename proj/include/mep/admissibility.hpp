#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mep/model.hpp"
#include "mep/procedures.hpp"

namespace mep {

/// A line through partial-sum space: t_j runs over [lo, hi] while every other
/// t_i stays at base[i]. Indices are 1-based in the sorted-coordinate frame,
/// so j names the j-th smallest observation.
struct LineSpec {
    int j = 2;
    std::vector<double> base;  ///< t_1..t_k; entry j is overwritten by the scan
    double lo = 0.0;
    double hi = 0.0;
    int resolution = 512;
};

/// Two adjacent points on a line where the j-th rejection indicator drops
/// from 1 to 0 as t_j increases.
struct Violation {
    int j;
    double tj_low, tj_high;
    std::vector<double> z_low, z_high;
    int decision_low, decision_high;
};

/// Spot-checks rule(gz) = g rule(z) on random inputs; false on any mismatch.
bool spot_check_equivariance(const ProcedureSpec& proc, int k, int trials = 64, std::uint64_t seed = 7);

/// Scans one line for decreases of the j-th indicator. Grid points outside S
/// (not strictly ascending) are skipped. Throws PreconditionError for a
/// non-equivariant procedure, k < 2, j outside 2..k, or fewer than two valid
/// points. Finding nothing is not a proof of admissibility.
std::vector<Violation> monotonicity_scan(const ProcedureSpec& proc, const LineSpec& line);

/// z*_j = C_j - eps and z-bar, equal to z* except that its top two
/// coordinates both sit at (C_k + C_{k-1})/2 - eps.
struct WitnessPair {
    std::vector<double> z_star;
    std::vector<double> z_bar;
};

/// Default eps = (C_k - C_{k-1}) / 4; requires 0 < eps < (C_k - C_{k-1}) / 2 and k >= 2.
WitnessPair step_up_violation_witness(const CriticalValues& c, double epsilon);
double default_witness_epsilon(const CriticalValues& c);

/// The segment from the witness construction: z_1..z_{k-2} and z_{k-1} + z_k
/// fixed at their z* values, z_k running from the midpoint up to z*_k.
LineSpec witness_line(const CriticalValues& c, double epsilon, int resolution = 512);

}  // namespace mep
