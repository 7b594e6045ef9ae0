#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mep {

/// Equicorrelated normal model: k endpoints, common variance sigma2 and
/// common correlation rho, so Sigma = sigma2 * ((1 - rho) I + rho 11').
///
/// Everything is closed form. With s = sigma2 (1 - rho) and
/// G = rho / (1 + (k - 1) rho):
///   Sigma^{-1} = s^{-1} (I - G 11')
///   |Sigma|    = sigma2^k (1 - rho)^{k-1} (1 + (k - 1) rho)
/// For k = 1 the correlation is inert (G = rho cancels against 1 - rho).
class IntraclassModel {
public:
    IntraclassModel(int k, double sigma2, double rho);

    int k() const { return k_; }
    double sigma2() const { return sigma2_; }
    double rho() const { return rho_; }

    /// G = rho / (1 + (k - 1) rho).
    double precision_constant() const { return g_; }
    /// sigma2 (1 - rho), the scale of the off-mean precision term.
    double residual_variance() const { return resid_; }
    double log_det() const { return log_det_; }

    /// Sigma^{-1} x in O(k).
    std::vector<double> precision_apply(std::span<const double> x) const;
    /// x' Sigma^{-1} y in O(k).
    double precision_form(std::span<const double> x, std::span<const double> y) const;

private:
    int k_;
    double sigma2_;
    double rho_;
    double g_;
    double resid_;
    double log_det_;
};

/// Set of rejected hypotheses, one bit per endpoint (bit i set = reject H_i).
/// Also used for hypothesis patterns v. Limited to 32 endpoints.
class ActionVector {
public:
    static constexpr int kMaxDim = 32;

    ActionVector() = default;
    explicit ActionVector(int k, std::uint32_t bits = 0);
    ActionVector(std::initializer_list<int> entries);

    int size() const { return k_; }
    std::uint32_t bits() const { return bits_; }
    bool operator[](int i) const { return (bits_ >> i) & 1u; }
    void set(int i, bool reject);
    int count() const;

    static ActionVector all(int k, bool reject);

    /// "0,1,1" style rendering for CSV cells.
    std::string to_csv() const;

    friend bool operator==(const ActionVector&, const ActionVector&) = default;

private:
    int k_ = 0;
    std::uint32_t bits_ = 0;
};

/// A point of the parameter space: every coordinate nonnegative.
class MeanVector {
public:
    explicit MeanVector(std::vector<double> mu);

    int size() const { return static_cast<int>(mu_.size()); }
    double operator[](int i) const { return mu_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return mu_; }

    /// v_i = 1 exactly when mu_i > 0.
    ActionVector pattern() const;
    /// Number of positive coordinates.
    int positives() const { return pattern().count(); }

private:
    std::vector<double> mu_;
};

/// Randomized decision at a single observation: a probability mass on the
/// 2^k actions, indexed by ActionVector::bits().
class DecisionMass {
public:
    /// Throws PreconditionError unless weights are nonnegative and sum to 1 within 1e-12.
    DecisionMass(int k, std::vector<double> weights);

    static DecisionMass point(const ActionVector& a);

    int size() const { return k_; }
    double weight(const ActionVector& a) const { return w_[a.bits()]; }
    std::span<const double> weights() const { return w_; }

private:
    int k_;
    std::vector<double> w_;
};

/// psi_i = total mass of actions that reject H_i.
std::vector<double> psi_from_delta(const DecisionMass& delta);

/// Tail sums t_j = z_j + ... + z_k.
struct PartialSums {
    std::vector<double> t;
};

PartialSums partial_sums(std::span<const double> z);
std::vector<double> observations_from(const PartialSums& t);
/// t is in S iff the observations it encodes are strictly ascending.
bool in_region_s(const PartialSums& t);

/// Log of the N(mu, Sigma) density at z.
double log_density(const IntraclassModel& model, std::span<const double> z, const MeanVector& mu);

struct ConditionalNormal {
    double mean;
    double variance;
};

/// Z_1 given Z_1 + Z_2 = t for k = 2.
ConditionalNormal conditional_z1_given_sum(const IntraclassModel& model, const MeanVector& mu, double t);

// ---------------------------------------------------------------------------
// Sampling

/// Name recorded in CSV headers next to the seed.
inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64-substreams/box-muller";

/// Draws per independently seeded substream. Draw i of a run with seed s
/// always comes from substream (s, i / kSubstreamSize), so results do not
/// depend on how substreams are distributed over workers.
inline constexpr std::size_t kSubstreamSize = std::size_t{1} << 16;

/// Standard normal variates from one substream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);
    double next();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Maps standard normal noise to N(mu, Sigma) draws. Uses the one-factor form
/// mu + sigma (sqrt(rho) W0 1 + sqrt(1 - rho) W) when rho >= 0 and the
/// symmetric square root of Sigma otherwise.
class GaussianDrawer {
public:
    GaussianDrawer(const IntraclassModel& model, const MeanVector& mu);
    void draw(NormalStream& rng, std::span<double> out) const;
    int k() const { return static_cast<int>(mu_.size()); }

private:
    std::vector<double> mu_;
    bool one_factor_;
    double common_;  // loading on the shared term
    double own_;     // loading on the coordinate's own term
};

/// n draws stored row-major.
struct SampleMatrix {
    int k = 0;
    std::size_t n = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    }
};

SampleMatrix sample(const IntraclassModel& model, const MeanVector& mu, std::size_t n, std::uint64_t seed);

}  // namespace mep
