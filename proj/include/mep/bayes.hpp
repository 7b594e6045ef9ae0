#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "mep/model.hpp"

namespace mep {

struct PriorAtom {
    double weight;
    MeanVector mu;
};

/// Two-component prior on (mu, theta): theta = 0 with probability beta and
/// then mu ~ xi_0, otherwise mu ~ xi_1. Both conditional priors are finite,
/// normalized, and closed under coordinate permutations.
class SymmetricDiscretePrior {
public:
    /// Expands every atom over the distinct permutations of its coordinates
    /// (splitting its weight equally) and normalizes each list to total 1.
    /// atoms1 may only be empty when beta == 1.
    SymmetricDiscretePrior(double beta, std::vector<PriorAtom> atoms0, std::vector<PriorAtom> atoms1);

    double beta() const { return beta_; }
    int k() const { return k_; }
    const std::vector<PriorAtom>& atoms0() const { return atoms0_; }
    const std::vector<PriorAtom>& atoms1() const { return atoms1_; }

private:
    double beta_;
    int k_;
    std::vector<PriorAtom> atoms0_;
    std::vector<PriorAtom> atoms1_;
};

/// Reads `theta,weight,mu_1,...,mu_k`. Group weights are normalized and beta
/// is the raw theta = 0 share of the total weight. Errors carry line numbers.
SymmetricDiscretePrior load_prior_csv(std::istream& in);
SymmetricDiscretePrior load_prior_file(const std::string& path);

struct PosteriorSummary {
    std::vector<double> q;  ///< Q(Omega^(i) | z)
    double log_marginal;    ///< log f(z)
    double p_theta1;        ///< P{Theta = 1 | z}
    std::vector<double> p_v0;  ///< P{V_i = 0 | z}
};

PosteriorSummary posterior_summary(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                                   std::span<const double> z);

/// Q(Omega^(i) | z): prior-weighted likelihood of {mu_i = 0} over the theta = 1
/// likelihood. The Bayes rule rejects H_i iff this is < 1 - beta. Returns
/// +infinity when xi_1 is empty (only allowed for beta = 1).
double q_value(const SymmetricDiscretePrior& prior, const IntraclassModel& model, std::span<const double> z, int i);

std::vector<double> q_values(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                             std::span<const double> z);

/// Reject H_i iff q_i < 1 - beta (equality accepts).
ActionVector bayes_rule(const SymmetricDiscretePrior& prior, const IntraclassModel& model, std::span<const double> z);

/// Brute force: the action minimizing the posterior expectation of
/// L_theta(a, mu) over all 2^k actions. Ties go to fewer rejections. k <= 12.
ActionVector posterior_oracle(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                              std::span<const double> z);

}  // namespace mep
