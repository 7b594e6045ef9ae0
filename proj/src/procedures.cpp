#include "mep/procedures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "mep/errors.hpp"
#include "mep/normal.hpp"
#include "mep/numerics.hpp"

namespace mep {

CriticalValues::CriticalValues(std::vector<double> c) : c_(std::move(c)) {
    if (c_.empty()) throw PreconditionError("critical values: empty");
    if (c_.size() > static_cast<std::size_t>(ActionVector::kMaxDim)) throw PreconditionError("critical values: k > 32");
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (!std::isfinite(c_[j])) throw PreconditionError("critical values: non-finite cutoff");
        if (j > 0 && !(c_[j - 1] < c_[j])) throw PreconditionError("critical values: must be strictly increasing");
    }
}

ActionVector step_up(const CriticalValues& c, std::span<const double> z) {
    const int k = c.size();
    if (z.size() != static_cast<std::size_t>(k)) {
        throw DimensionError("step_up: expected " + std::to_string(k) + " observations, got " + std::to_string(z.size()));
    }
    std::array<int, ActionVector::kMaxDim> order{};
    std::iota(order.begin(), order.begin() + k, 0);
    std::stable_sort(order.begin(), order.begin() + k, [&](int a, int b) { return z[a] < z[b]; });

    ActionVector out(k);
    for (int j = 0; j < k; ++j) {
        if (z[order[j]] > c[j]) {
            for (int r = j; r < k; ++r) out.set(order[r], true);
            break;
        }
    }
    return out;
}

ActionVector marginal(double c, std::span<const double> z) {
    ActionVector out(static_cast<int>(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i) out.set(static_cast<int>(i), z[i] > c);
    return out;
}

ProcedureSpec make_step_up(CriticalValues c) {
    return {"step-up", true, [c = std::move(c)](std::span<const double> z) { return step_up(c, z); }};
}

ProcedureSpec make_marginal(double c) {
    return {"marginal", true, [c](std::span<const double> z) { return marginal(c, z); }};
}

ProcedureSpec make_constant(int k, bool reject) {
    return {reject ? "always-reject" : "always-accept", true, [k, reject](std::span<const double> z) {
                if (z.size() != static_cast<std::size_t>(k)) throw DimensionError("constant procedure: dimension mismatch");
                return ActionVector::all(k, reject);
            }};
}

// ---------------------------------------------------------------------------

StripImprovement::StripImprovement(double c1, double c2, double rho, double sigma2)
    : c1_(c1), c2_(c2), rho_(rho), sigma2_(sigma2) {
    if (!(c1 < c2) || !std::isfinite(c1) || !std::isfinite(c2)) throw PreconditionError("strip: need C1 < C2");
    if (!(rho > -1.0 && rho < 1.0)) throw PreconditionError("strip: rho must lie in (-1, 1)");
    if (!(sigma2 > 0.0)) throw PreconditionError("strip: sigma2 must be positive");
    spread_ = std::sqrt(2.0 * sigma2 * (1.0 - rho));
}

namespace {

// Phi(x) - 1/2 without cancellation near x = 0.
double half_centered_cdf(double x) { return 0.5 * std::erf(x * kInvSqrt2); }

double d_unchecked(const StripImprovement& s, double t) {
    const double a = (2.0 * s.c2() - t) / s.spread();
    const double b = (t - 2.0 * s.c1()) / s.spread();
    return half_centered_cdf(a) - 2.0 * half_centered_cdf(b);
}

void require_strip(const StripImprovement& s, double t, const char* what) {
    if (!s.contains(t)) {
        throw PreconditionError(std::string(what) + ": t = " + std::to_string(t) + " is outside the open strip (" +
                                std::to_string(s.lower()) + ", " + std::to_string(s.upper()) + ")");
    }
}

}  // namespace

double d_of_t(const StripImprovement& s, double t) {
    require_strip(s, t, "d_of_t");
    return d_unchecked(s, t);
}

double c_star(const StripImprovement& s, double t) {
    require_strip(s, t, "c_star");
    const double target = std::abs(d_unchecked(s, t));
    if (target == 0.0) return 0.5 * t;
    const auto residual = [&](double c) { return half_centered_cdf((2.0 * c - t) / s.spread()) - target; };
    return bisect(residual, 0.5 * t, 0.5 * t + 10.0 * s.spread(), 1e-12, 200).root;
}

double d_sign_change(const StripImprovement& s) {
    return bisect([&](double t) { return d_unchecked(s, t); }, s.lower(), s.upper(), 1e-13, 200).root;
}

ActionVector psi_star(const StripImprovement& s, std::span<const double> z) {
    if (z.size() != 2) throw DimensionError("psi_star: requires k = 2");
    const double t = z[0] + z[1];
    if (!s.contains(t)) {
        const CriticalValues c({s.c1(), s.c2()});
        return step_up(c, z);
    }
    const double d = d_unchecked(s, t);
    const double offset = 2.0 * z[0] - t;
    const double mass = half_centered_cdf(std::abs(offset) / s.spread());
    // Upper boundary z1 = C* belongs to the middle, lower boundary z1 = t - C* to (0,1).
    const bool middle = offset > 0.0 ? mass <= std::abs(d) && d != 0.0 : mass < std::abs(d);
    if (middle) return d > 0.0 ? ActionVector{0, 0} : ActionVector{1, 1};
    return offset > 0.0 ? ActionVector{1, 0} : ActionVector{0, 1};
}

ProcedureSpec make_psi_star(const StripImprovement& s) {
    return {"psi-star", true, [s](std::span<const double> z) { return psi_star(s, z); }};
}

double w_value(double z1, double t, const ActionVector& v, double b, const StripImprovement& s, double cstar) {
    require_strip(s, t, "w_value");
    if (v.size() != 2) throw DimensionError("w_value: v must have length 2");
    if (!(b > 0.0)) throw PreconditionError("w_value: b must be positive");
    if (!(cstar >= 0.5 * t - 1e-12)) throw PreconditionError("w_value: C* must be at least t/2");

    const double z[2] = {z1, t - z1};
    const ActionVector su = step_up(CriticalValues({s.c1(), s.c2()}), z);

    const double d = d_unchecked(s, t);
    ActionVector modified;
    if (z1 < t - cstar) {
        modified = {0, 1};
    } else if (z1 > cstar) {
        modified = {1, 0};
    } else if (d > 0.0) {
        modified = {0, 0};
    } else if (d < 0.0) {
        modified = {1, 1};
    } else {
        modified = {0, 1};
    }

    double w = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double diff = static_cast<double>(su[i]) - static_cast<double>(modified[i]);
        w += diff * (v[i] ? -b : 1.0);
    }
    return w;
}

}  // namespace mep
