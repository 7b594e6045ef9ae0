#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mep/model.hpp"

namespace mep {

/// Strictly increasing step-up cutoffs C_1 < ... < C_k.
class CriticalValues {
public:
    explicit CriticalValues(std::vector<double> c);

    int size() const { return static_cast<int>(c_.size()); }
    double operator[](int j) const { return c_[static_cast<std::size_t>(j)]; }
    std::span<const double> values() const { return c_; }

private:
    std::vector<double> c_;
};

/// Step-up: scan order statistics from the smallest upward, accept while
/// Z_(j) <= C_j, and reject the current and every larger observation at the
/// first exceedance. Ties among observations are ordered by index.
ActionVector step_up(const CriticalValues& c, std::span<const double> z);

/// Reject H_i iff z_i > c.
ActionVector marginal(double c, std::span<const double> z);

/// A nonrandomized decision rule with a display name.
struct ProcedureSpec {
    std::string name;
    bool equivariant = false;  ///< rule(gz) = g rule(z) for every permutation g
    std::function<ActionVector(std::span<const double>)> rule;

    ActionVector operator()(std::span<const double> z) const { return rule(z); }
};

ProcedureSpec make_step_up(CriticalValues c);
ProcedureSpec make_marginal(double c);
/// Ignores the data: rejects (or accepts) every hypothesis.
ProcedureSpec make_constant(int k, bool reject);

// ---------------------------------------------------------------------------
// k = 2 improvement of step-up on the strip 2 C_1 < z_1 + z_2 < C_1 + C_2.

class StripImprovement {
public:
    StripImprovement(double c1, double c2, double rho, double sigma2 = 1.0);

    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double rho() const { return rho_; }
    double sigma2() const { return sigma2_; }
    /// sqrt(2 sigma2 (1 - rho)), the scale of 2 Z_1 - t given Z_1 + Z_2 = t.
    double spread() const { return spread_; }
    double lower() const { return 2.0 * c1_; }
    double upper() const { return c1_ + c2_; }
    /// Open strip membership.
    bool contains(double t) const { return t > lower() && t < upper(); }

private:
    double c1_, c2_, rho_, sigma2_, spread_;
};

/// D(t) = P(t - C1 < Z1 < C2 | t) - P(t/2 < Z1 < t - C1 | t) under mu_1 = mu_2,
/// i.e. Phi((2C2 - t)/s) - 2 Phi((t - 2C1)/s) + 1/2.
double d_of_t(const StripImprovement& s, double t);

/// The C* >= t/2 with Phi((2C* - t)/s) - 1/2 = |D(t)|, by bisection.
double c_star(const StripImprovement& s, double t);

/// The point of the strip where D changes sign (D is strictly decreasing).
double d_sign_change(const StripImprovement& s);

/// The modified procedure. Equal to step-up off the open strip; on the line
/// z1 + z2 = t inside it: (0,1) below t - C*, (1,0) above C*, and in between
/// (0,0) when D(t) > 0 or (1,1) when D(t) < 0.
///
/// Middle-region membership is decided by comparing Phi(|2 z1 - t| / s) - 1/2
/// against |D(t)| directly; that is the defining equation of C* evaluated at
/// z1, so no root is needed per observation.
ActionVector psi_star(const StripImprovement& s, std::span<const double> z);

ProcedureSpec make_psi_star(const StripImprovement& s);

/// W(z; v) = (psi_SU(z) - psi*(z))' (1 - (b + 1) v) on the line z1 + z2 = t,
/// with psi* built from the supplied C* (>= t/2) and the sign of D(t).
double w_value(double z1, double t, const ActionVector& v, double b, const StripImprovement& s, double cstar);

}  // namespace mep
