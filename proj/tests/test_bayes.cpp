#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mep/admissibility.hpp"
#include "mep/bayes.hpp"
#include "mep/errors.hpp"
#include "support.hpp"

using namespace mep;

namespace {

SymmetricDiscretePrior simple_k1() {
    return SymmetricDiscretePrior(0.5, {{1.0, MeanVector({0.0})}}, {{1.0, MeanVector({1.0})}});
}

IntraclassModel random_model(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lower = k > 1 ? -1.0 / (k - 1) : -0.9;
    return IntraclassModel(k, 0.5 + 1.5 * u(rng), lower + (0.9 - lower) * (0.05 + 0.9 * u(rng)));
}

}  // namespace

TEST_CASE("k = 1 threshold at z = 0.5") {
    const auto prior = simple_k1();
    const IntraclassModel m(1, 1.0, 0.0);
    CHECK(bayes_rule(prior, m, std::vector<double>{0.7}) == ActionVector{1});
    CHECK(bayes_rule(prior, m, std::vector<double>{0.3}) == ActionVector{0});
    // Exactly at the threshold q = 1 - beta and equality accepts.
    CHECK(q_value(prior, m, std::vector<double>{0.5}, 0) == doctest::Approx(0.5).epsilon(1e-14));
    for (double z = -3.0; z <= 3.0; z += 0.01) {
        if (std::abs(z - 0.5) < 1e-9) continue;
        CHECK(bayes_rule(prior, m, std::vector<double>{z})[0] == (z > 0.5));
    }
}

TEST_CASE("prior symmetrization") {
    const SymmetricDiscretePrior p(0.3, {{1.0, MeanVector({0.0, 0.0, 0.0})}},
                                   {{2.0, MeanVector({1.0, 0.0, 0.0})}, {1.0, MeanVector({2.0, 2.0, 2.0})}});
    CHECK(p.k() == 3);
    CHECK(p.atoms0().size() == 1);
    CHECK(p.atoms1().size() == 4);
    double total = 0.0;
    for (const auto& a : p.atoms1()) total += a.weight;
    CHECK(total == doctest::Approx(1.0));
    for (const auto& a : p.atoms1()) {
        if (a.mu[0] == 2.0) CHECK(a.weight == doctest::Approx(1.0 / 3.0));
        else CHECK(a.weight == doctest::Approx(2.0 / 9.0));
    }
    CHECK_THROWS_AS(SymmetricDiscretePrior(0.5, {{1.0, MeanVector({0.0})}}, {}), PreconditionError);
    CHECK_NOTHROW(SymmetricDiscretePrior(1.0, {{1.0, MeanVector({0.0})}}, {}));
    CHECK_THROWS_AS(SymmetricDiscretePrior(0.5, {{1.0, MeanVector({0.0})}}, {{1.0, MeanVector({0.0, 1.0})}}), DimensionError);
}

TEST_CASE("equal observations give equal q") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto prior = test::random_prior(rng, 3);
        const auto m = random_model(rng, 3);
        auto z = test::random_normal_vector(rng, 3);
        z[2] = z[1];
        const auto q = q_values(prior, m, z);
        CHECK(q[1] == doctest::Approx(q[2]).epsilon(1e-13));
    }
}

TEST_CASE("degenerate beta") {
    const IntraclassModel m(2, 1.0, 0.3);
    const SymmetricDiscretePrior all_null(1.0, {{1.0, MeanVector({0.0, 0.0})}, {1.0, MeanVector({0.0, 2.0})}}, {});
    const SymmetricDiscretePrior all_alt(0.0, {}, {{1.0, MeanVector({1.0, 2.0})}, {1.0, MeanVector({0.5, 0.5})}});
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto z = test::random_normal_vector(rng, 2, 1.0, 3.0);
        CHECK(bayes_rule(all_null, m, z) == ActionVector{0, 0});
        CHECK(posterior_oracle(all_null, m, z) == ActionVector{0, 0});
        CHECK(bayes_rule(all_alt, m, z) == ActionVector{1, 1});
        CHECK(posterior_oracle(all_alt, m, z) == ActionVector{1, 1});
        CHECK(q_values(all_alt, m, z) == std::vector<double>{0.0, 0.0});
    }
    CHECK(std::isinf(q_value(all_null, m, std::vector<double>{1.0, 1.0}, 0)));
}

TEST_CASE("bayes_rule agrees with the brute-force posterior minimizer") {
    std::mt19937_64 rng(1001);
    int agreed = 0, compared = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        const int k = 1 + trial % 3;
        const auto prior = test::random_prior(rng, k);
        const auto m = random_model(rng, k);
        const auto z = test::random_normal_vector(rng, k);
        const auto q = q_values(prior, m, z);
        const double thr = 1.0 - prior.beta();
        if (std::any_of(q.begin(), q.end(), [&](double x) { return std::abs(x - thr) <= 1e-9; })) continue;
        ++compared;
        if (bayes_rule(prior, m, z) == posterior_oracle(prior, m, z)) ++agreed;
    }
    CHECK(compared >= 1000);
    CHECK(agreed == compared);
}

TEST_CASE("bayes_rule is permutation-equivariant") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto prior = test::random_prior(rng, 3);
        const auto m = random_model(rng, 3);
        const auto proc = ProcedureSpec{"bayes", true, [&](std::span<const double> z) { return bayes_rule(prior, m, z); }};
        CHECK(spot_check_equivariance(proc, 3, 8, static_cast<std::uint64_t>(trial)));
    }
}

TEST_CASE("q ordering and suffix structure on sorted observations") {
    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + trial % 3;
        const auto prior = test::random_prior(rng, k);
        const auto m = random_model(rng, k);
        auto z = test::random_normal_vector(rng, k);
        std::sort(z.begin(), z.end());
        const auto q = q_values(prior, m, z);
        for (int i = 0; i + 1 < k; ++i) CHECK(q[static_cast<std::size_t>(i)] >= q[static_cast<std::size_t>(i + 1)] - 1e-10);
        const auto a = bayes_rule(prior, m, z);
        bool seen_reject = false;
        for (int i = 0; i < k; ++i) {
            if (a[i]) seen_reject = true;
            CHECK(a[i] == seen_reject);
        }
    }
}

TEST_CASE("q decreases strictly between distinct sorted observations") {
    // A prior with an atom that mixes zero and positive coordinates.
    const SymmetricDiscretePrior prior(0.4, {{1.0, MeanVector({0.0, 0.0, 1.0})}},
                                       {{1.0, MeanVector({0.0, 2.0, 2.0})}, {1.0, MeanVector({1.0, 1.0, 1.0})}});
    const IntraclassModel m(3, 1.0, 0.2);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        auto z = test::random_normal_vector(rng, 3);
        std::sort(z.begin(), z.end());
        const auto q = q_values(prior, m, z);
        CHECK(q[0] > q[1]);
        CHECK(q[1] > q[2]);
    }
}

TEST_CASE("posterior summary forms agree") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const int k = 1 + trial % 4;
        const auto prior = test::random_prior(rng, k);
        const auto m = random_model(rng, k);
        const auto z = test::random_normal_vector(rng, k);
        const auto ps = posterior_summary(prior, m, z);
        const double thr = 1.0 - prior.beta();
        CHECK(ps.p_theta1 >= 0.0);
        CHECK(ps.p_theta1 <= 1.0 + 1e-12);
        for (int i = 0; i < k; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            CHECK(ps.p_v0[ii] >= 0.0);
            CHECK(ps.p_v0[ii] <= 1.0 + 1e-12);
            // q carries the xi_1 likelihood without the (1 - beta) factor.
            CHECK(ps.q[ii] * ps.p_theta1 == doctest::Approx(thr * ps.p_v0[ii]).epsilon(1e-10));
            if (std::abs(ps.q[ii] - thr) > 1e-9) CHECK((ps.q[ii] < thr) == (ps.p_v0[ii] < ps.p_theta1));
        }
        // The marginal density matches a direct sum.
        double f = 0.0;
        for (const auto& a : prior.atoms0()) f += prior.beta() * a.weight * std::exp(log_density(m, z, a.mu));
        for (const auto& a : prior.atoms1()) f += thr * a.weight * std::exp(log_density(m, z, a.mu));
        CHECK(std::exp(ps.log_marginal) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("q from the tilted prior matches the direct ratio") {
    // f(z|mu) factors as h(z) exp(-mu'Sigma^{-1}mu/2 + z'mu/s) exp(-G (1'z)(1'mu)/s); the last
    // factor can be moved into the prior weights for a fixed coordinate sum.
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 2 + trial % 3;
        const auto prior = test::random_prior(rng, k);
        const auto m = random_model(rng, k);
        const auto z = test::random_normal_vector(rng, k);
        const double s = m.residual_variance(), g = m.precision_constant();
        double sz = 0.0;
        for (double x : z) sz += x;
        const auto tilted = [&](const PriorAtom& a) {
            double smu = 0.0, zmu = 0.0;
            for (int i = 0; i < k; ++i) {
                smu += a.mu[i];
                zmu += z[static_cast<std::size_t>(i)] * a.mu[i];
            }
            const double w = std::log(a.weight) - g * sz * smu / s;
            return w - 0.5 * m.precision_form(a.mu.values(), a.mu.values()) + zmu / s;
        };
        std::vector<double> den;
        for (const auto& a : prior.atoms1()) den.push_back(tilted(a));
        const double mx = *std::max_element(den.begin(), den.end());
        double d = 0.0;
        for (double x : den) d += std::exp(x - mx);
        const auto q = q_values(prior, m, z);
        for (int i = 0; i < k; ++i) {
            double n = 0.0;
            for (const auto& a : prior.atoms0()) {
                if (a.mu[i] == 0.0) n += prior.beta() * std::exp(tilted(a) - mx);
            }
            for (const auto& a : prior.atoms1()) {
                if (a.mu[i] == 0.0) n += (1 - prior.beta()) * std::exp(tilted(a) - mx);
            }
            CHECK(q[static_cast<std::size_t>(i)] == doctest::Approx(n / d).epsilon(1e-10));
        }
    }
}

TEST_CASE("q is stable for large observations") {
    const SymmetricDiscretePrior prior(0.5, {{1.0, MeanVector({0.0, 0.0})}}, {{1.0, MeanVector({0.0, 50.0})}});
    const IntraclassModel m(2, 1.0, 0.0);
    const auto q = q_values(prior, m, std::vector<double>{1.0, 400.0});
    CHECK(std::isfinite(q[0]));
    CHECK(q[1] == 0.0);
    CHECK(bayes_rule(prior, m, std::vector<double>{1.0, 400.0}) == ActionVector{0, 1});
}

TEST_CASE("prior file loader") {
    std::istringstream good("theta,weight,mu_1,mu_2\n0,3,0,0\n1,1,0,2\n# comment\n\n1,1,1,1\n");
    const auto p = load_prior_csv(good);
    CHECK(p.k() == 2);
    CHECK(p.beta() == doctest::Approx(0.6));
    CHECK(p.atoms0().size() == 1);
    CHECK(p.atoms1().size() == 3);

    const auto error_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            load_prior_csv(in);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(error_of("theta,weight,mu_1\n0,1,0\n1,1,-2\n").find("line 3") != std::string::npos);
    CHECK(error_of("theta,weight,mu_1\n0,1,0\n1,1,-2\n").find("negative") != std::string::npos);
    CHECK(error_of("theta,weight,mu_1\n0,1,0,0\n").find("line 2") != std::string::npos);
    CHECK(error_of("theta,weight,mu_1\n2,1,0\n").find("theta") != std::string::npos);
    CHECK(error_of("theta,weight,mu_1\n0,abc,0\n").find("not a number") != std::string::npos);
    CHECK(error_of("weight,theta,mu_1\n").find("line 1") != std::string::npos);
    std::istringstream only_null("theta,weight,mu_1\n0,1,0\n0,1,2\n");
    CHECK(load_prior_csv(only_null).beta() == 1.0);
    CHECK(error_of("") == "prior file: missing header");
    CHECK_THROWS_AS(load_prior_file("/nonexistent/prior.csv"), InputError);
}
