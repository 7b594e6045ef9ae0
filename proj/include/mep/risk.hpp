#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mep/model.hpp"
#include "mep/procedures.hpp"

namespace mep {

/// Monte Carlo estimate of the vector risk (R0, R1) at one mean vector.
/// R0 is the expected number of false rejections, R1 the expected number of
/// false acceptances.
struct RiskReport {
    MeanVector mu;
    double r0 = 0.0;
    double r1 = 0.0;
    double se0 = 0.0;
    double se1 = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Vector risk plus per-endpoint risks R_(i), all from the same draws.
struct RiskEvaluation {
    RiskReport report;
    std::vector<double> components;
};

/// Options for the Monte Carlo drivers. Results never depend on `workers`.
struct McOptions {
    unsigned workers = 0;  ///< 0 = hardware concurrency
};

RiskEvaluation evaluate_risk(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                             std::size_t n, std::uint64_t seed, McOptions opts = {});

RiskReport vector_risk_mc(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                          std::size_t n, std::uint64_t seed, McOptions opts = {});

std::vector<double> component_risks(const ProcedureSpec& proc, const IntraclassModel& model, const MeanVector& mu,
                                    std::size_t n, std::uint64_t seed, McOptions opts = {});

struct Estimate {
    double value;
    double se;
};

/// R0 + b R1 with standard error sqrt(se0^2 + b^2 se1^2).
Estimate linear_combo_risk(const RiskReport& report, double b);

/// [R0 + b R1](first) - [R0 + b R1](second) for each b, evaluated on one
/// shared draw set (common random numbers). The per-draw difference is
/// (psi_first - psi_second)' (1 - (b + 1) v).
std::vector<Estimate> risk_difference_mc(const ProcedureSpec& first, const ProcedureSpec& second,
                                         const IntraclassModel& model, const MeanVector& mu,
                                         std::span<const double> bs, std::size_t n, std::uint64_t seed,
                                         McOptions opts = {});

/// E_mu[ W(Z; v(mu)) | Z1 + Z2 = t ] as an exact finite sum over the pieces of
/// the line on which step-up and psi* are both constant.
double conditional_w_expectation(const StripImprovement& s, double b, const MeanVector& mu, double t);
/// Same sum for an explicit pattern v, with Z1 | T = t centred at (t + mean_difference) / 2.
double conditional_w_expectation(const StripImprovement& s, double b, const ActionVector& v, double mean_difference,
                                 double t);

struct QuadratureResult {
    double value;
    double error;
};

/// Delta(mu) = [R0 + b R1](step-up) - [R0 + b R1](psi*), integrating the
/// conditional W expectation against the density of T = Z1 + Z2 over the
/// strip. Adaptive Gauss-Kronrod with an absolute tolerance; the strip is
/// split where D(t) changes sign. Throws NumericalError if the tolerance is
/// not reached.
QuadratureResult risk_difference_quadrature(const StripImprovement& s, double b, const MeanVector& mu,
                                            double abs_tol = 1e-8);

}  // namespace mep
