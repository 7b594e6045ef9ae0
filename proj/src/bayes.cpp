#include "mep/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "mep/errors.hpp"

namespace mep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<PriorAtom> symmetrize(std::vector<PriorAtom> atoms, int k, const char* which) {
    double total = 0.0;
    for (const auto& a : atoms) {
        if (a.mu.size() != k) throw DimensionError(std::string(which) + ": atoms have inconsistent dimension");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw PreconditionError(std::string(which) + ": weights must be positive");
        total += a.weight;
    }
    if (atoms.empty()) return {};

    // Merge identical permuted atoms so the stored list stays small.
    std::map<std::vector<double>, double> merged;
    for (const auto& a : atoms) {
        std::vector<double> mu(a.mu.values().begin(), a.mu.values().end());
        std::sort(mu.begin(), mu.end());
        std::vector<std::vector<double>> orbit;
        do {
            orbit.push_back(mu);
        } while (std::next_permutation(mu.begin(), mu.end()));
        const double share = a.weight / total / static_cast<double>(orbit.size());
        for (auto& p : orbit) merged[std::move(p)] += share;
    }
    std::vector<PriorAtom> out;
    out.reserve(merged.size());
    for (auto& [mu, w] : merged) out.push_back({w, MeanVector(mu)});
    return out;
}

double log_sum_exp(const std::vector<double>& xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Log prior-times-likelihood terms, split by theta and by whether mu_i = 0.
struct LogTerms {
    std::vector<double> all1;                   // xi_1 atoms without the (1 - beta) factor
    std::vector<std::vector<double>> null_i;    // both thetas, atoms with mu_i = 0
    std::vector<double> all;                    // both thetas, every atom
};

LogTerms log_terms(const SymmetricDiscretePrior& prior, const IntraclassModel& model, std::span<const double> z) {
    if (prior.k() != model.k()) throw DimensionError("prior and model dimensions differ");
    if (z.size() != static_cast<std::size_t>(model.k())) throw DimensionError("observation has wrong dimension");
    LogTerms out;
    out.null_i.resize(static_cast<std::size_t>(model.k()));
    const auto add = [&](const PriorAtom& a, double group_mass, bool theta1) {
        const double bare = std::log(a.weight) + log_density(model, z, a.mu);
        if (theta1) out.all1.push_back(bare);
        if (group_mass <= 0.0) return;
        const double lt = std::log(group_mass) + bare;
        out.all.push_back(lt);
        for (int i = 0; i < model.k(); ++i) {
            if (a.mu[i] == 0.0) out.null_i[static_cast<std::size_t>(i)].push_back(lt);
        }
    };
    for (const auto& a : prior.atoms0()) add(a, prior.beta(), false);
    for (const auto& a : prior.atoms1()) add(a, 1.0 - prior.beta(), true);
    return out;
}

}  // namespace

SymmetricDiscretePrior::SymmetricDiscretePrior(double beta, std::vector<PriorAtom> atoms0, std::vector<PriorAtom> atoms1)
    : beta_(beta), k_(0) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("prior: beta must lie in [0, 1]");
    if (atoms1.empty() && beta < 1.0) throw PreconditionError("prior: xi_1 must have atoms when beta < 1");
    if (atoms0.empty() && beta > 0.0) throw PreconditionError("prior: xi_0 must have atoms when beta > 0");
    k_ = !atoms0.empty() ? atoms0.front().mu.size() : atoms1.front().mu.size();
    atoms0_ = symmetrize(std::move(atoms0), k_, "xi_0");
    atoms1_ = symmetrize(std::move(atoms1), k_, "xi_1");
}

SymmetricDiscretePrior load_prior_csv(std::istream& in) {
    std::string line;
    int lineno = 0;
    int k = -1;
    std::vector<PriorAtom> group[2];
    double raw[2] = {0.0, 0.0};

    const auto fail = [&](const std::string& msg) { throw InputError("prior file line " + std::to_string(lineno) + ": " + msg); };
    const auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t\r"));
            cell.erase(cell.find_last_not_of(" \t\r") + 1);
            cells.push_back(cell);
        }
        return cells;
    };
    const auto number = [&](const std::string& cell) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            fail("not a number: '" + cell + "'");
        }
        if (used != cell.size() || !std::isfinite(v)) fail("not a number: '" + cell + "'");
        return v;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        const auto cells = split(line);
        if (k < 0) {
            if (cells.size() < 3 || cells[0] != "theta" || cells[1] != "weight") fail("expected header theta,weight,mu_1,...,mu_k");
            for (std::size_t c = 2; c < cells.size(); ++c) {
                if (cells[c] != "mu_" + std::to_string(c - 1)) fail("expected column mu_" + std::to_string(c - 1));
            }
            k = static_cast<int>(cells.size()) - 2;
            continue;
        }
        if (cells.size() != static_cast<std::size_t>(k + 2)) fail("expected " + std::to_string(k + 2) + " cells");
        const double theta = number(cells[0]);
        if (theta != 0.0 && theta != 1.0) fail("theta must be 0 or 1");
        const double w = number(cells[1]);
        if (!(w > 0.0)) fail("weight must be positive");
        std::vector<double> mu;
        for (int i = 0; i < k; ++i) {
            const double m = number(cells[static_cast<std::size_t>(i + 2)]);
            if (m < 0.0) fail("mean coordinate mu_" + std::to_string(i + 1) + " is negative");
            mu.push_back(m);
        }
        const int g = theta == 1.0 ? 1 : 0;
        raw[g] += w;
        group[g].push_back({w, MeanVector(std::move(mu))});
    }
    if (k < 0) throw InputError("prior file: missing header");
    if (group[0].empty() && group[1].empty()) throw InputError("prior file: no atoms");
    const double beta = raw[0] / (raw[0] + raw[1]);
    try {
        return SymmetricDiscretePrior(beta, std::move(group[0]), std::move(group[1]));
    } catch (const std::logic_error& e) {
        throw InputError(std::string("prior file: ") + e.what());
    }
}

SymmetricDiscretePrior load_prior_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open prior file '" + path + "'");
    return load_prior_csv(in);
}

PosteriorSummary posterior_summary(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                                   std::span<const double> z) {
    const LogTerms lt = log_terms(prior, model, z);
    PosteriorSummary out;
    out.log_marginal = log_sum_exp(lt.all);
    if (!std::isfinite(out.log_marginal)) throw NumericalError("posterior: marginal density is not finite");
    out.p_theta1 = lt.all1.empty() ? 0.0 : (1.0 - prior.beta()) * std::exp(log_sum_exp(lt.all1) - out.log_marginal);
    for (const auto& terms : lt.null_i) out.p_v0.push_back(std::exp(log_sum_exp(terms) - out.log_marginal));
    out.q = q_values(prior, model, z);
    return out;
}

std::vector<double> q_values(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                             std::span<const double> z) {
    const LogTerms lt = log_terms(prior, model, z);
    const double log_den = log_sum_exp(lt.all1);
    std::vector<double> q;
    q.reserve(lt.null_i.size());
    for (const auto& terms : lt.null_i) {
        const double log_num = log_sum_exp(terms);
        if (log_den == kNegInf) {
            if (prior.beta() < 1.0) throw NumericalError("q_value: denominator vanished");
            q.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        if (std::isnan(log_num) || std::isnan(log_den)) throw NumericalError("q_value: likelihood sums are not finite");
        q.push_back(std::exp(log_num - log_den));
    }
    return q;
}

double q_value(const SymmetricDiscretePrior& prior, const IntraclassModel& model, std::span<const double> z, int i) {
    if (i < 0 || i >= model.k()) throw PreconditionError("q_value: index out of range");
    return q_values(prior, model, z)[static_cast<std::size_t>(i)];
}

ActionVector bayes_rule(const SymmetricDiscretePrior& prior, const IntraclassModel& model, std::span<const double> z) {
    const auto q = q_values(prior, model, z);
    const double threshold = 1.0 - prior.beta();
    ActionVector a(model.k());
    for (int i = 0; i < model.k(); ++i) a.set(i, q[static_cast<std::size_t>(i)] < threshold);
    return a;
}

ActionVector posterior_oracle(const SymmetricDiscretePrior& prior, const IntraclassModel& model,
                              std::span<const double> z) {
    const int k = model.k();
    if (k > 12) throw PreconditionError("posterior_oracle: k > 12 is too large to enumerate");
    if (prior.k() != k || z.size() != static_cast<std::size_t>(k)) throw DimensionError("posterior_oracle: dimension mismatch");

    struct Weighted {
        double log_w;
        int theta;
        const MeanVector* mu;
    };
    std::vector<Weighted> atoms;
    for (const auto& a : prior.atoms0()) {
        if (prior.beta() > 0.0) atoms.push_back({std::log(prior.beta() * a.weight) + log_density(model, z, a.mu), 0, &a.mu});
    }
    for (const auto& a : prior.atoms1()) {
        if (prior.beta() < 1.0) atoms.push_back({std::log((1.0 - prior.beta()) * a.weight) + log_density(model, z, a.mu), 1, &a.mu});
    }
    double m = kNegInf;
    for (const auto& w : atoms) m = std::max(m, w.log_w);

    ActionVector best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
        const ActionVector a(k, bits);
        double loss = 0.0;
        for (const auto& w : atoms) {
            double l = 0.0;
            for (int i = 0; i < k; ++i) {
                const bool positive = (*w.mu)[i] > 0.0;
                if (w.theta == 0) l += (a[i] && !positive) ? 1.0 : 0.0;   // false rejections
                else l += (!a[i] && positive) ? 1.0 : 0.0;                // false acceptances
            }
            loss += std::exp(w.log_w - m) * l;
        }
        if (loss < best_loss || (loss == best_loss && a.count() < best.count())) {
            best_loss = loss;
            best = a;
        }
    }
    return best;
}

}  // namespace mep
