#include "mep/risk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mep/errors.hpp"
#include "mep/normal.hpp"

namespace mep {

namespace {

/// Running sums of one scalar per draw.
struct Moments {
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sumsq += o.sumsq;
    }
    Estimate estimate(std::size_t n) const {
        const double nn = static_cast<double>(n);
        const double mean = sum / nn;
        const double var = n > 1 ? std::max(0.0, (sumsq - sum * mean) / (nn - 1.0)) : 0.0;
        return {mean, std::sqrt(var / nn)};
    }
};

/// Runs `Acc::add(span<const double> z)` over n draws from N(mu, Sigma). Each
/// substream gets its own accumulator; they are merged in substream order so
/// the result is independent of the number of workers.
template <class Acc, class Make>
Acc run_draws(const IntraclassModel& model, const MeanVector& mu, std::size_t n, std::uint64_t seed, McOptions opts,
              Make make) {
    const GaussianDrawer drawer(model, mu);
    const std::size_t streams = (n + kSubstreamSize - 1) / kSubstreamSize;
    std::vector<Acc> parts;
    parts.reserve(streams);
    for (std::size_t s = 0; s < streams; ++s) parts.push_back(make());

    const auto work = [&](std::size_t s) {
        NormalStream rng(seed, s);
        std::array<double, ActionVector::kMaxDim> buf{};
        const std::span<double> z(buf.data(), static_cast<std::size_t>(model.k()));
        const std::size_t stop = std::min(n, (s + 1) * kSubstreamSize);
        for (std::size_t i = s * kSubstreamSize; i < stop; ++i) {
            drawer.draw(rng, z);
            parts[s].add(std::span<const double>(z));
        }
    };

    unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, streams));
    if (workers <= 1) {
        for (std::size_t s = 0; s < streams; ++s) work(s);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t s = w; s < streams; s += workers) work(s);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    Acc total = make();
    for (const auto& p : parts) total.merge(p);
    return total;
}

struct RiskAccumulator {
    const ProcedureSpec* proc;
    ActionVector v;
    Moments false_rej, false_acc;
    std::vector<double> rejections;

    void add(std::span<const double> z) {
        const ActionVector a = (*proc)(z);
        if (a.size() != v.size()) throw DimensionError("procedure returned an action of the wrong length");
        int l0 = 0, l1 = 0;
        for (int i = 0; i < v.size(); ++i) {
            if (a[i]) rejections[static_cast<std::size_t>(i)] += 1.0;
            if (a[i] && !v[i]) ++l0;
            if (!a[i] && v[i]) ++l1;
        }
        false_rej.add(l0);
        false_acc.add(l1);
    }
    void merge(const RiskAccumulator& o) {
        false_rej.merge(o.false_rej);
        false_acc.merge(o.false_acc);
        for (std::size_t i = 0; i < rejections.size(); ++i) rejections[i] += o.rejections[i];
    }
};

struct DifferenceAccumulator {
    const ProcedureSpec* first;
    const ProcedureSpec* second;
    ActionVector v;
    std::span<const double> bs;
    std::vector<Moments> diffs;

    void add(std::span<const double> z) {
        const ActionVector a = (*first)(z);
        const ActionVector c = (*second)(z);
        if (a == c) {
            for (auto& d : diffs) d.add(0.0);
            return;
        }
        // Differences in false rejections and false acceptances.
        double d0 = 0.0, d1 = 0.0;
        for (int i = 0; i < v.size(); ++i) {
            const double diff = static_cast<double>(a[i]) - static_cast<double>(c[i]);
            if (v[i]) d1 -= diff;
            else d0 += diff;
        }
        for (std::size_t j = 0; j < bs.size(); ++j) diffs[j].add(d0 + bs[j] * d1);
    }
    void merge(const DifferenceAccumulator& o) {
        for (std::size_t j = 0; j < diffs.size(); ++j) diffs[j].merge(o.diffs[j]);
    }
};

void require_mc(const IntraclassModel& model, const MeanVector& mu, std::size_t n) {
    if (n < 100) throw PreconditionError("risk: n must be at least 100");
    if (mu.size() != model.k()) throw DimensionError("risk: mean vector length differs from k");
}

}  // namespace

RiskEvaluation evaluate_risk(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                             std::size_t n, std::uint64_t seed, McOptions opts) {
    require_mc(model, mu, n);
    const ActionVector v = mu.pattern();
    const auto acc = run_draws<RiskAccumulator>(model, mu, n, seed, opts, [&] {
        return RiskAccumulator{&proc, v, {}, {}, std::vector<double>(static_cast<std::size_t>(model.k()), 0.0)};
    });
    const Estimate e0 = acc.false_rej.estimate(n);
    const Estimate e1 = acc.false_acc.estimate(n);
    RiskEvaluation out{RiskReport{mu, e0.value, e1.value, e0.se, e1.se, n, seed}, {}};
    for (int i = 0; i < model.k(); ++i) {
        const double p = acc.rejections[static_cast<std::size_t>(i)] / static_cast<double>(n);
        out.components.push_back(v[i] ? 1.0 - p : p);
    }
    return out;
}

RiskReport vector_risk_mc(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                          std::size_t n, std::uint64_t seed, McOptions opts) {
    return evaluate_risk(proc, model, mu, n, seed, opts).report;
}

std::vector<double> component_risks(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                                    std::size_t n, std::uint64_t seed, McOptions opts) {
    return evaluate_risk(proc, model, mu, n, seed, opts).components;
}

Estimate linear_combo_risk(const RiskReport& report, double b) {
    if (!(b > 0.0)) throw PreconditionError("linear_combo_risk: b must be positive");
    return {report.r0 + b * report.r1, std::sqrt(report.se0 * report.se0 + b * b * report.se1 * report.se1)};
}

std::vector<Estimate> risk_difference_mc(const ProcedureSpec& first, const ProcedureSpec& second,
                                         const IntraclassModel& model, const MeanVector& mu,
                                         std::span<const double> bs, std::size_t n, std::uint64_t seed,
                                         McOptions opts) {
    require_mc(model, mu, n);
    for (double b : bs) {
        if (!(b > 0.0)) throw PreconditionError("risk_difference_mc: b must be positive");
    }
    const ActionVector v = mu.pattern();
    const auto acc = run_draws<DifferenceAccumulator>(model, mu, n, seed, opts, [&] {
        return DifferenceAccumulator{&first, &second, v, bs, std::vector<Moments>(bs.size())};
    });
    std::vector<Estimate> out;
    for (const auto& d : acc.diffs) out.push_back(d.estimate(n));
    return out;
}

// ---------------------------------------------------------------------------

double conditional_w_expectation(const StripImprovement& s, double b, const MeanVector& mu, double t) {
    if (mu.size() != 2) throw DimensionError("conditional_w_expectation: requires k = 2");
    return conditional_w_expectation(s, b, mu.pattern(), mu[0] - mu[1], t);
}

double conditional_w_expectation(const StripImprovement& s, double b, const ActionVector& v, double mean_difference,
                                 double t) {
    if (v.size() != 2) throw DimensionError("conditional_w_expectation: requires k = 2");
    if (!(b > 0.0)) throw PreconditionError("conditional_w_expectation: b must be positive");
    const double cstar = c_star(s, t);  // validates t
    const double mean = 0.5 * t + 0.5 * mean_difference;
    const double sd = 0.5 * s.spread();

    // Every point where step-up or psi* can change on the line.
    std::array<double, 8> cuts{-std::numeric_limits<double>::infinity(), t - s.c2(), s.c1(), t - cstar,
                               cstar, t - s.c1(), s.c2(), std::numeric_limits<double>::infinity()};
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        double mid;
        if (std::isinf(lo)) mid = hi - 1.0;
        else if (std::isinf(hi)) mid = lo + 1.0;
        else mid = 0.5 * (lo + hi);
        const double w = w_value(mid, t, v, b, s, cstar);
        if (w != 0.0) total += w * normal_interval(lo, hi, mean, sd);
    }
    return total;
}

QuadratureResult risk_difference_quadrature(const StripImprovement& s, double b, const MeanVector& mu,
                                            double abs_tol) {
    if (mu.size() != 2) throw DimensionError("risk_difference_quadrature: requires k = 2");
    if (!(b > 0.0)) throw PreconditionError("risk_difference_quadrature: b must be positive");
    const double t_mean = mu[0] + mu[1];
    const double t_sd = std::sqrt(2.0 * s.sigma2() * (1.0 + s.rho()));
    const auto integrand = [&](double t) {
        if (!s.contains(t)) return 0.0;
        return conditional_w_expectation(s, b, mu, t) * normal_pdf((t - t_mean) / t_sd) / t_sd;
    };

    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    const double width = s.upper() - s.lower();
    constexpr int kMaxDepth = 40;
    QuadratureResult total{0.0, 0.0};
    bool converged = true;

    // Depth-first bisection; a panel is accepted once its Kronrod/Gauss
    // difference is within its share of the absolute tolerance.
    const auto adapt = [&](auto&& self, double a, double c, int depth) -> void {
        double err = 0.0;
        const double val = Rule::integrate(integrand, a, c, 0, 0.0, &err);
        const double allowance = abs_tol * (c - a) / width;
        if (err <= allowance || depth >= kMaxDepth) {
            if (err > allowance) converged = false;
            total.value += val;
            total.error += err;
            return;
        }
        const double m = 0.5 * (a + c);
        self(self, a, m, depth + 1);
        self(self, m, c, depth + 1);
    };

    const double split = d_sign_change(s);
    adapt(adapt, s.lower(), split, 0);
    adapt(adapt, split, s.upper(), 0);
    if (!converged || total.error > abs_tol) {
        throw NumericalError("risk_difference_quadrature: tolerance not reached (estimated error " +
                             std::to_string(total.error) + ")");
    }
    return total;
}

}  // namespace mep
