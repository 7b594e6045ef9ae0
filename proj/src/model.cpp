#include "mep/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mep/errors.hpp"
#include "mep/normal.hpp"

namespace mep {

namespace {

void require_dim(std::size_t got, int k, const char* what) {
    if (got != static_cast<std::size_t>(k)) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(k) + ", got " +
                             std::to_string(got));
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

IntraclassModel::IntraclassModel(int k, double sigma2, double rho) : k_(k), sigma2_(sigma2), rho_(rho) {
    if (k < 1) throw PreconditionError("model: k must be at least 1");
    if (k > ActionVector::kMaxDim) throw PreconditionError("model: k is limited to 32 endpoints");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw PreconditionError("model: sigma2 must be positive");
    if (!(rho > -1.0 && rho < 1.0)) throw PreconditionError("model: rho must lie in (-1, 1)");
    if (k > 1 && !(rho > -1.0 / (k - 1))) {
        throw PreconditionError("model: rho must exceed -1/(k-1) for a positive definite covariance");
    }
    g_ = rho / (1.0 + (k - 1) * rho);
    resid_ = sigma2 * (1.0 - rho);
    log_det_ = k * std::log(sigma2) + (k - 1) * std::log1p(-rho) + std::log1p((k - 1) * rho);
}

std::vector<double> IntraclassModel::precision_apply(std::span<const double> x) const {
    require_dim(x.size(), k_, "precision_apply");
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - g_ * sum) / resid_;
    return out;
}

double IntraclassModel::precision_form(std::span<const double> x, std::span<const double> y) const {
    require_dim(x.size(), k_, "precision_form");
    require_dim(y.size(), k_, "precision_form");
    double dot = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        sx += x[i];
        sy += y[i];
    }
    return (dot - g_ * sx * sy) / resid_;
}

// ---------------------------------------------------------------------------

ActionVector::ActionVector(int k, std::uint32_t bits) : k_(k), bits_(bits) {
    if (k < 0 || k > kMaxDim) throw PreconditionError("action vector: dimension out of range");
    if (k < kMaxDim) bits_ &= (std::uint32_t{1} << k) - 1u;
}

ActionVector::ActionVector(std::initializer_list<int> entries) : ActionVector(static_cast<int>(entries.size())) {
    int i = 0;
    for (int e : entries) {
        if (e != 0 && e != 1) throw PreconditionError("action vector: entries must be 0 or 1");
        set(i++, e == 1);
    }
}

void ActionVector::set(int i, bool reject) {
    const std::uint32_t m = std::uint32_t{1} << i;
    bits_ = reject ? (bits_ | m) : (bits_ & ~m);
}

int ActionVector::count() const { return std::popcount(bits_); }

ActionVector ActionVector::all(int k, bool reject) { return ActionVector(k, reject ? ~std::uint32_t{0} : 0u); }

std::string ActionVector::to_csv() const {
    std::string s;
    for (int i = 0; i < k_; ++i) {
        if (i) s += ',';
        s += (*this)[i] ? '1' : '0';
    }
    return s;
}

MeanVector::MeanVector(std::vector<double> mu) : mu_(std::move(mu)) {
    if (mu_.empty()) throw PreconditionError("mean vector: empty");
    for (double m : mu_) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw PreconditionError("mean vector: coordinates must be finite and >= 0");
    }
}

ActionVector MeanVector::pattern() const {
    ActionVector v(size());
    for (int i = 0; i < size(); ++i) v.set(i, mu_[static_cast<std::size_t>(i)] > 0.0);
    return v;
}

DecisionMass::DecisionMass(int k, std::vector<double> weights) : k_(k), w_(std::move(weights)) {
    if (k < 1 || k > 20) throw PreconditionError("decision mass: k out of range");
    if (w_.size() != (std::size_t{1} << k)) throw DimensionError("decision mass: need 2^k weights");
    double total = 0.0;
    for (double w : w_) {
        if (!(w >= 0.0)) throw PreconditionError("decision mass: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("decision mass: weights must sum to 1");
}

DecisionMass DecisionMass::point(const ActionVector& a) {
    std::vector<double> w(std::size_t{1} << a.size(), 0.0);
    w[a.bits()] = 1.0;
    return DecisionMass(a.size(), std::move(w));
}

std::vector<double> psi_from_delta(const DecisionMass& delta) {
    const int k = delta.size();
    std::vector<double> psi(static_cast<std::size_t>(k), 0.0);
    const auto w = delta.weights();
    for (std::size_t bits = 0; bits < w.size(); ++bits) {
        for (int i = 0; i < k; ++i) {
            if ((bits >> i) & 1u) psi[static_cast<std::size_t>(i)] += w[bits];
        }
    }
    return psi;
}

// ---------------------------------------------------------------------------

PartialSums partial_sums(std::span<const double> z) {
    PartialSums out{std::vector<double>(z.size())};
    double acc = 0.0;
    for (std::size_t j = z.size(); j-- > 0;) {
        acc += z[j];
        out.t[j] = acc;
    }
    return out;
}

std::vector<double> observations_from(const PartialSums& t) {
    const std::size_t k = t.t.size();
    std::vector<double> z(k);
    for (std::size_t j = 0; j < k; ++j) z[j] = t.t[j] - (j + 1 < k ? t.t[j + 1] : 0.0);
    return z;
}

bool in_region_s(const PartialSums& t) {
    const auto z = observations_from(t);
    return std::adjacent_find(z.begin(), z.end(), [](double a, double b) { return !(a < b); }) == z.end();
}

double log_density(const IntraclassModel& model, std::span<const double> z, const MeanVector& mu) {
    require_dim(z.size(), model.k(), "log_density");
    require_dim(mu.values().size(), model.k(), "log_density");
    std::vector<double> d(z.begin(), z.end());
    for (int i = 0; i < model.k(); ++i) d[static_cast<std::size_t>(i)] -= mu[i];
    const double q = model.precision_form(d, d);
    return -0.5 * model.k() * std::log(2.0 * std::numbers::pi) - 0.5 * model.log_det() - 0.5 * q;
}

ConditionalNormal conditional_z1_given_sum(const IntraclassModel& model, const MeanVector& mu, double t) {
    if (model.k() != 2 || mu.size() != 2) throw PreconditionError("conditional_z1_given_sum: requires k = 2");
    return {0.5 * t + 0.5 * (mu[0] - mu[1]), 0.5 * model.residual_variance()};
}

// ---------------------------------------------------------------------------

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull))) {}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * kScale;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * kScale;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

GaussianDrawer::GaussianDrawer(const IntraclassModel& model, const MeanVector& mu)
    : mu_(mu.values().begin(), mu.values().end()), one_factor_(model.rho() >= 0.0) {
    require_dim(mu_.size(), model.k(), "sample");
    const double sigma = std::sqrt(model.sigma2());
    if (one_factor_) {
        common_ = sigma * std::sqrt(model.rho());
        own_ = sigma * std::sqrt(1.0 - model.rho());
    } else {
        // Symmetric root a I + c 11' with eigenvalues sqrt(sigma2 (1 - rho)) and
        // sqrt(sigma2 (1 + (k - 1) rho)).
        const int k = model.k();
        own_ = std::sqrt(model.residual_variance());
        common_ = (std::sqrt(model.sigma2() * (1.0 + (k - 1) * model.rho())) - own_) / k;
    }
}

void GaussianDrawer::draw(NormalStream& rng, std::span<double> out) const {
    const std::size_t k = mu_.size();
    if (one_factor_) {
        const double shared = common_ * rng.next();
        for (std::size_t i = 0; i < k; ++i) out[i] = mu_[i] + shared + own_ * rng.next();
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = rng.next();
            sum += out[i];
        }
        for (std::size_t i = 0; i < k; ++i) out[i] = mu_[i] + own_ * out[i] + common_ * sum;
    }
}

SampleMatrix sample(const IntraclassModel& model, const MeanVector& mu, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw PreconditionError("sample: n must be at least 1");
    const GaussianDrawer drawer(model, mu);
    SampleMatrix out{model.k(), n, std::vector<double>(n * static_cast<std::size_t>(model.k()))};
    const auto k = static_cast<std::size_t>(model.k());
    for (std::size_t start = 0; start < n; start += kSubstreamSize) {
        NormalStream rng(seed, start / kSubstreamSize);
        const std::size_t stop = std::min(n, start + kSubstreamSize);
        for (std::size_t i = start; i < stop; ++i) drawer.draw(rng, std::span<double>(out.data).subspan(i * k, k));
    }
    return out;
}

}  // namespace mep
