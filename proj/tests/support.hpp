#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "mep/bayes.hpp"
#include "mep/model.hpp"
#include "mep/procedures.hpp"

namespace mep::test {

using Matrix = std::vector<std::vector<double>>;

inline Matrix intraclass_matrix(int k, double sigma2, double rho) {
    Matrix m(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), sigma2 * rho));
    for (int i = 0; i < k; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = sigma2;
    return m;
}

/// Gauss-Jordan inverse with partial pivoting; also returns log|det|.
inline Matrix dense_inverse(Matrix a, double* log_det = nullptr) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    double ld = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        const double piv = a[c][c];
        ld += std::log(std::abs(piv));
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    if (log_det) *log_det = ld;
    return inv;
}

inline double dense_log_density(int k, double sigma2, double rho, const std::vector<double>& z,
                                const std::vector<double>& mu) {
    double ld = 0.0;
    const Matrix inv = dense_inverse(intraclass_matrix(k, sigma2, rho), &ld);
    double q = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            q += (z[static_cast<std::size_t>(i)] - mu[static_cast<std::size_t>(i)]) * inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                 (z[static_cast<std::size_t>(j)] - mu[static_cast<std::size_t>(j)]);
        }
    }
    return -0.5 * k * std::log(2.0 * M_PI) - 0.5 * ld - 0.5 * q;
}

inline double phi_oracle(double x) {
    static const boost::math::normal_distribution<double> n01;
    return boost::math::cdf(n01, x);
}

/// Literal reading of the step-up recipe: try every ordering of the indices,
/// keep those that sort z, and walk the stages. All valid orderings must agree.
inline ActionVector brute_step_up(const std::vector<double>& c, const std::vector<double>& z, bool* consistent = nullptr) {
    const int k = static_cast<int>(z.size());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    bool have = false;
    ActionVector result(k);
    if (consistent) *consistent = true;
    do {
        bool sorted = true;
        for (int j = 0; j + 1 < k; ++j) sorted = sorted && z[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] <= z[static_cast<std::size_t>(perm[static_cast<std::size_t>(j + 1)])];
        if (!sorted) continue;
        ActionVector a(k);
        for (int stage = 0; stage < k; ++stage) {
            const int h = perm[static_cast<std::size_t>(stage)];
            if (z[static_cast<std::size_t>(h)] <= c[static_cast<std::size_t>(stage)]) continue;  // accept H_(stage)
            for (int r = stage; r < k; ++r) a.set(perm[static_cast<std::size_t>(r)], true);
            break;
        }
        if (have && !(a == result) && consistent) *consistent = false;
        if (!have) result = a;
        have = true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

/// Random finite prior with atoms that mix zero and positive coordinates.
/// xi_1 never puts mass on mu = 0, where q would sit exactly at 1 - beta.
inline SymmetricDiscretePrior random_prior(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto atom = [&](bool allow_all_zero) {
        std::vector<double> mu(static_cast<std::size_t>(k));
        do {
            for (auto& m : mu) m = unit(rng) < 0.4 ? 0.0 : 3.0 * unit(rng);
        } while (!allow_all_zero && std::all_of(mu.begin(), mu.end(), [](double m) { return m == 0.0; }));
        return mu;
    };
    const auto atoms = [&](int count, bool allow_zero) {
        std::vector<PriorAtom> out;
        for (int i = 0; i < count; ++i) out.push_back({0.1 + unit(rng), MeanVector(atom(allow_zero))});
        double total = 0.0;
        for (const auto& a : out) total += a.weight;
        for (auto& a : out) a.weight /= total;
        return out;
    };
    const double beta = 0.05 + 0.9 * unit(rng);
    auto a0 = atoms(1 + static_cast<int>(3 * unit(rng)), true);
    auto a1 = atoms(1 + static_cast<int>(3 * unit(rng)), false);
    return SymmetricDiscretePrior(beta, std::move(a0), std::move(a1));
}

inline std::vector<double> random_normal_vector(std::mt19937_64& rng, int k, double mean = 1.0, double sd = 1.5) {
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> z(static_cast<std::size_t>(k));
    for (auto& x : z) x = d(rng);
    return z;
}

}  // namespace mep::test
