#include "mep/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mep/admissibility.hpp"
#include "mep/bayes.hpp"
#include "mep/csv.hpp"
#include "mep/errors.hpp"
#include "mep/model.hpp"
#include "mep/procedures.hpp"
#include "mep/risk.hpp"

namespace mep {

namespace {

struct RunConfig {
    std::string command;
    int k = 0;  // 0 = infer
    double sigma2 = 1.0;
    double rho = 0.0;
    std::string proc = "step-up";
    std::string crit;
    std::string prior;
    std::size_t n = 100000;
    std::uint64_t seed = 20050101;
    std::string out;
    std::string grid;
    std::string b = "0.5,1,2";
    std::string mu;
    std::vector<std::string> z;
    bool oracle = false;
    std::string preset;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    int line_j = 0;
    std::string line_t;
    bool witness = false;
};

/// Everything a command needs once the configuration has been validated.
struct Setup {
    int k = 0;
    std::optional<IntraclassModel> model;
    std::optional<CriticalValues> crit;
    std::shared_ptr<const SymmetricDiscretePrior> prior;
    std::optional<ProcedureSpec> proc;
};

void echo(std::ostream& os, const RunConfig& c, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    os << "# mep " << c.command << '\n';
    os << "# k=" << c.k << '\n';
    os << "# sigma2=" << format_double(c.sigma2) << '\n';
    os << "# rho=" << format_double(c.rho) << '\n';
    for (const auto& [key, value] : extra) os << "# " << key << '=' << value << '\n';
    os << "# seed=" << c.seed << '\n';
    os << "# generator=" << kGeneratorName << '\n';
}

int infer_k(RunConfig& c, const std::vector<double>& crit, const SymmetricDiscretePrior* prior) {
    int inferred = 0;
    if (!crit.empty()) inferred = static_cast<int>(crit.size());
    if (prior) {
        if (inferred && prior->k() != inferred) throw DimensionError("--crit has " + std::to_string(inferred) +
                                                                     " values but the prior has dimension " +
                                                                     std::to_string(prior->k()));
        inferred = prior->k();
    }
    if (c.k == 0) c.k = inferred;
    if (c.k <= 0) throw InputError("cannot infer k: pass --k");
    if (inferred && inferred != c.k) {
        throw DimensionError("--k " + std::to_string(c.k) + " is inconsistent with inputs of dimension " +
                             std::to_string(inferred));
    }
    return c.k;
}

Setup prepare(RunConfig& c, bool need_proc) {
    Setup s;
    std::vector<double> crit;
    if (!c.crit.empty()) crit = parse_doubles(c.crit, "--crit");
    if (!c.prior.empty()) s.prior = std::make_shared<SymmetricDiscretePrior>(load_prior_file(c.prior));
    if (c.proc == "bayes" && need_proc && !s.prior) throw InputError("--proc bayes requires --prior FILE");
    if (c.proc == "marginal") {
        if (crit.size() != 1) throw InputError("--proc marginal takes a single cutoff in --crit");
        s.k = infer_k(c, {}, s.prior.get());
    } else {
        s.k = infer_k(c, crit, s.prior.get());
    }
    s.model.emplace(s.k, c.sigma2, c.rho);
    if (!crit.empty() && c.proc != "marginal") s.crit.emplace(crit);

    if (!need_proc) return s;
    if (c.proc == "step-up") {
        if (!s.crit) throw InputError("--proc step-up requires --crit C1,...,Ck");
        s.proc = make_step_up(*s.crit);
    } else if (c.proc == "marginal") {
        s.proc = make_marginal(crit.front());
    } else if (c.proc == "psi-star") {
        if (s.k != 2 || !s.crit) throw DimensionError("--proc psi-star requires k = 2 and --crit C1,C2");
        s.proc = make_psi_star(StripImprovement((*s.crit)[0], (*s.crit)[1], c.rho, c.sigma2));
    } else if (c.proc == "bayes") {
        auto prior = s.prior;
        auto model = *s.model;
        s.proc = ProcedureSpec{"bayes", true, [prior, model](std::span<const double> z) {
                                   return bayes_rule(*prior, model, z);
                               }};
    } else {
        throw InputError("unknown procedure '" + c.proc + "' (step-up, marginal, psi-star, bayes)");
    }
    return s;
}

std::vector<std::pair<std::string, std::string>> proc_fields(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> f{{"proc", c.proc}};
    if (!c.crit.empty()) f.emplace_back("crit", c.crit);
    if (!c.prior.empty()) f.emplace_back("prior", c.prior);
    return f;
}

// Cartesian product of one grid over k coordinates, first coordinate slowest.
std::vector<std::vector<double>> product_grid(const std::vector<double>& axis, int k) {
    std::vector<std::vector<double>> out{{}};
    for (int d = 0; d < k; ++d) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out) {
            for (double x : axis) {
                auto p = prefix;
                p.push_back(x);
                next.push_back(std::move(p));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<std::vector<double>> mean_points(const RunConfig& c, int k) {
    if (!c.mu.empty()) {
        auto mu = parse_doubles(c.mu, "--mu");
        if (static_cast<int>(mu.size()) != k) throw DimensionError("--mu has " + std::to_string(mu.size()) + " values, expected " + std::to_string(k));
        return {mu};
    }
    const Grid g = parse_grid(c.grid.empty() ? "0:3:13" : c.grid);
    if (g.lo < 0.0) throw InputError("--grid: mean coordinates must be nonnegative");
    return product_grid(g.points(), k);
}

// ---------------------------------------------------------------------------

void cmd_region(RunConfig& c, std::ostream& os) {
    Setup s = prepare(c, true);
    if (s.k != 2) throw DimensionError("region export requires k = 2");
    const Grid g = parse_grid(c.grid.empty() ? "-1:4:51" : c.grid);
    auto fields = proc_fields(c);
    fields.emplace_back("grid", format_double(g.lo) + ":" + format_double(g.hi) + ":" + std::to_string(g.steps));
    echo(os, c, fields);
    os << "z1,z2,a1,a2\n";
    const auto axis = g.points();
    for (double z1 : axis) {
        for (double z2 : axis) {
            const double z[2] = {z1, z2};
            os << format_double(z1) << ',' << format_double(z2) << ',' << (*s.proc)(z).to_csv() << '\n';
        }
    }
}

void cmd_risk(RunConfig& c, std::ostream& os) {
    Setup s = prepare(c, true);
    if (c.n < 100) throw InputError("--n must be at least 100");
    const auto points = mean_points(c, s.k);
    auto fields = proc_fields(c);
    if (!c.mu.empty()) fields.emplace_back("mu", c.mu);
    else fields.emplace_back("grid", c.grid.empty() ? "0:3:13" : c.grid);
    fields.emplace_back("n", std::to_string(c.n));
    echo(os, c, fields);
    for (int i = 1; i <= s.k; ++i) os << "mu_" << i << ',';
    os << "r0,se0,r1,se1,n,seed\n";
    for (const auto& p : points) {
        const RiskReport r = vector_risk_mc(*s.proc, *s.model, MeanVector(p), c.n, c.seed);
        os << join_doubles(p) << ',' << format_double(r.r0) << ',' << format_double(r.se0) << ','
           << format_double(r.r1) << ',' << format_double(r.se1) << ',' << r.n << ',' << r.seed << '\n';
    }
}

void cmd_dominate(RunConfig& c, std::ostream& os) {
    Setup s = prepare(c, false);
    if (s.k != 2 || !s.crit) throw DimensionError("dominate requires k = 2 and --crit C1,C2");
    if (c.n < 100) throw InputError("--n must be at least 100");
    const auto bs = parse_doubles(c.b, "--b");
    for (double b : bs) {
        if (!(b > 0.0)) throw InputError("--b values must be positive");
    }
    const auto points = mean_points(c, 2);
    const StripImprovement strip((*s.crit)[0], (*s.crit)[1], c.rho, c.sigma2);
    const ProcedureSpec su = make_step_up(*s.crit);
    const ProcedureSpec improved = make_psi_star(strip);

    echo(os, c, {{"crit", c.crit},
                 c.mu.empty() ? std::pair<std::string, std::string>{"grid", c.grid.empty() ? "0:3:13" : c.grid}
                              : std::pair<std::string, std::string>{"mu", c.mu},
                 {"b", c.b},
                 {"n", std::to_string(c.n)}});
    os << "mu_1,mu_2,b,delta_quadrature,delta_mc,se_mc\n";
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int below = 0;
    for (const auto& p : points) {
        const MeanVector mu(p);
        const auto mc = risk_difference_mc(su, improved, *s.model, mu, bs, c.n, c.seed);
        for (std::size_t j = 0; j < bs.size(); ++j) {
            const double q = risk_difference_quadrature(strip, bs[j], mu).value;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            if (mc[j].value < -3.0 * mc[j].se) ++below;
            os << join_doubles(p) << ',' << format_double(bs[j]) << ',' << format_double(q) << ','
               << format_double(mc[j].value) << ',' << format_double(mc[j].se) << '\n';
        }
    }
    os << "# min_delta_quadrature=" << format_double(lo) << '\n';
    os << "# max_delta_quadrature=" << format_double(hi) << '\n';
    os << "# count_delta_mc_below_minus_3se=" << below << '\n';
}

void cmd_bayes(RunConfig& c, std::ostream& os) {
    if (c.prior.empty()) throw InputError("bayes requires --prior FILE");
    if (c.z.empty()) throw InputError("bayes requires at least one --z z1,...,zk");
    Setup s = prepare(c, false);
    std::vector<std::vector<double>> points;
    for (const auto& text : c.z) {
        auto z = parse_doubles(text, "--z");
        if (static_cast<int>(z.size()) != s.k) throw DimensionError("--z '" + text + "' has " + std::to_string(z.size()) + " values, expected " + std::to_string(s.k));
        points.push_back(std::move(z));
    }
    echo(os, c, {{"prior", c.prior}, {"beta", format_double(s.prior->beta())}, {"oracle", c.oracle ? "1" : "0"}});
    for (int i = 1; i <= s.k; ++i) os << "z_" << i << ',';
    for (int i = 1; i <= s.k; ++i) os << "q_" << i << ',';
    os << "threshold";
    for (int i = 1; i <= s.k; ++i) os << ",a_" << i;
    if (c.oracle) {
        for (int i = 1; i <= s.k; ++i) os << ",oracle_" << i;
        os << ",agree";
    }
    os << '\n';
    for (const auto& z : points) {
        const auto q = q_values(*s.prior, *s.model, z);
        const ActionVector a = bayes_rule(*s.prior, *s.model, z);
        os << join_doubles(z) << ',' << join_doubles(q) << ',' << format_double(1.0 - s.prior->beta()) << ','
           << a.to_csv();
        if (c.oracle) {
            const ActionVector o = posterior_oracle(*s.prior, *s.model, z);
            os << ',' << o.to_csv() << ',' << (o == a ? 1 : 0);
        }
        os << '\n';
    }
}

void cmd_admcheck(RunConfig& c, std::ostream& os) {
    if (c.witness) {
        Setup s = prepare(c, false);
        if (!s.crit) throw InputError("--witness requires --crit C1,...,Ck");
        const double eps = std::isnan(c.epsilon) ? default_witness_epsilon(*s.crit) : c.epsilon;
        const WitnessPair w = step_up_violation_witness(*s.crit, eps);
        echo(os, c, {{"crit", c.crit}, {"witness", "1"}, {"epsilon", format_double(eps)}});
        os << "point";
        for (int i = 1; i <= s.k; ++i) os << ",z_" << i;
        for (int i = 1; i <= s.k; ++i) os << ",a_" << i;
        os << '\n';
        os << "z_star," << join_doubles(w.z_star) << ',' << step_up(*s.crit, w.z_star).to_csv() << '\n';
        os << "z_bar," << join_doubles(w.z_bar) << ',' << step_up(*s.crit, w.z_bar).to_csv() << '\n';
        return;
    }

    Setup s = prepare(c, true);
    LineSpec line;
    auto fields = proc_fields(c);
    if (!c.preset.empty()) {
        if (c.preset != "corollary-4.4") throw InputError("unknown preset '" + c.preset + "'");
        // The preset segment is built from the step-up cutoffs.
        if (!s.crit) throw InputError("--preset corollary-4.4 requires --crit C1,...,Ck");
        const double eps = std::isnan(c.epsilon) ? default_witness_epsilon(*s.crit) : c.epsilon;
        line = witness_line(*s.crit, eps);
        if (!c.grid.empty()) line.resolution = parse_grid(c.grid).steps;
        fields.emplace_back("preset", c.preset);
        fields.emplace_back("epsilon", format_double(eps));
    } else {
        if (c.line_j == 0 || c.line_t.empty() || c.grid.empty()) {
            throw InputError("admcheck needs --preset corollary-4.4 or all of --line-j, --line-t, --grid");
        }
        line.j = c.line_j;
        line.base = parse_doubles(c.line_t, "--line-t");
        if (static_cast<int>(line.base.size()) != s.k) throw DimensionError("--line-t must have k values");
        const Grid g = parse_grid(c.grid);
        line.lo = g.lo;
        line.hi = g.hi;
        line.resolution = g.steps;
        fields.emplace_back("line_j", std::to_string(line.j));
        fields.emplace_back("line_t", c.line_t);
    }
    fields.emplace_back("range", format_double(line.lo) + ":" + format_double(line.hi) + ":" +
                                     std::to_string(line.resolution));
    const auto violations = monotonicity_scan(*s.proc, line);
    echo(os, c, fields);
    os << "j,tj_low,tj_high";
    for (int i = 1; i <= s.k; ++i) os << ",z_low_" << i;
    for (int i = 1; i <= s.k; ++i) os << ",z_high_" << i;
    os << ",decision_low,decision_high\n";
    for (const auto& v : violations) {
        os << v.j << ',' << format_double(v.tj_low) << ',' << format_double(v.tj_high) << ',' << join_doubles(v.z_low)
           << ',' << join_doubles(v.z_high) << ',' << v.decision_low << ',' << v.decision_high << '\n';
    }
    os << "# violations=" << violations.size() << '\n';
}

void add_shared(CLI::App* sub, RunConfig& c) {
    sub->add_option("--k", c.k, "number of endpoints (inferred from --crit or --prior when omitted)");
    sub->add_option("--sigma2", c.sigma2, "common variance")->capture_default_str();
    sub->add_option("--rho", c.rho, "common correlation")->capture_default_str();
    sub->add_option("--proc", c.proc, "step-up | marginal | psi-star | bayes")->capture_default_str();
    sub->add_option("--crit", c.crit, "critical values C1,...,Ck (marginal: one cutoff)");
    sub->add_option("--prior", c.prior, "prior CSV file: theta,weight,mu_1,...,mu_k");
    sub->add_option("--n", c.n, "Monte Carlo draws")->capture_default_str();
    sub->add_option("--seed", c.seed, "Monte Carlo seed")->capture_default_str();
    sub->add_option("--out", c.out, "write CSV here instead of stdout");
    sub->add_option("--grid", c.grid, "grid lo:hi:steps");
    sub->add_option("--b", c.b, "false-acceptance weights b1,b2,...")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiple endpoint testing under an equicorrelated normal model"};
    app.require_subcommand(1);
    RunConfig c;

    auto* region = app.add_subcommand("region", "export decisions on a k = 2 grid");
    auto* risk = app.add_subcommand("risk", "Monte Carlo vector risk (R0, R1) over a mean grid");
    auto* dominate = app.add_subcommand("dominate", "risk difference step-up minus psi-star over a mean grid");
    auto* bayes = app.add_subcommand("bayes", "q-values and Bayes actions at given observations");
    auto* admcheck = app.add_subcommand("admcheck", "monotonicity scan for the admissibility condition");
    for (auto* sub : {region, risk, dominate, bayes, admcheck}) add_shared(sub, c);
    risk->add_option("--mu", c.mu, "single mean vector mu_1,...,mu_k instead of a grid");
    dominate->add_option("--mu", c.mu, "single mean vector mu_1,mu_2 instead of a grid");
    bayes->add_option("--z", c.z, "observation z_1,...,z_k (repeatable)");
    bayes->add_flag("--oracle", c.oracle, "append the brute-force posterior action and an agreement flag");
    admcheck->add_option("--preset", c.preset, "corollary-4.4");
    admcheck->add_option("--epsilon", c.epsilon, "offset below the cutoffs for the witness construction");
    admcheck->add_option("--line-j", c.line_j, "index of the varying partial sum (2..k)");
    admcheck->add_option("--line-t", c.line_t, "base partial sums t_1,...,t_k");
    admcheck->add_flag("--witness", c.witness, "print the step-up violation witness pair");

    // CLI11 consumes a reversed argument list without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    c.command = app.get_subcommands().front()->get_name();

    try {
        std::ofstream file;
        std::ostringstream buffer;
        if (c.command == "region") cmd_region(c, buffer);
        else if (c.command == "risk") cmd_risk(c, buffer);
        else if (c.command == "dominate") cmd_dominate(c, buffer);
        else if (c.command == "bayes") cmd_bayes(c, buffer);
        else cmd_admcheck(c, buffer);
        if (c.out.empty()) {
            out << buffer.str();
        } else {
            file.open(c.out);
            if (!file) throw InputError("cannot open output file '" + c.out + "'");
            file << buffer.str();
        }
    } catch (const NumericalError& e) {
        err << "mep: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "mep: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace mep
