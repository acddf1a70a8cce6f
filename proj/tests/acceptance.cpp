// Acceptance suite: one PASS/FAIL line per criterion, every tolerance pinned below.
// Usage: acceptance [criterion numbers...]   (all criteria when none given)

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "invnet/audit.hpp"
#include "invnet/backprop.hpp"
#include "invnet/experiment.hpp"
#include "invnet/metrics.hpp"
#include "invnet/optimizers.hpp"
#include "oracles.hpp"

using namespace invnet;

namespace {

// criterion 1
constexpr std::size_t kTableRuns = 20;
constexpr double kTableEpsilon = 1e-4;
constexpr std::uint64_t kTableSeed = 1;
constexpr double kBackpropSigmoidMin = 25.0;
constexpr double kBackpropTanhMin = 18.0;
constexpr double kUnitwiseNaturalMax = 5.0;
constexpr double kBackpropagatedMetricMax = 3.0;
constexpr double kQdBackpropagatedMetricMax = 5.0;
constexpr double kQdNaturalMax = 7.0;
constexpr double kDiagGaussNewtonRatio = 2.0;
constexpr double kDiagGaussNewtonSigmoidMin = 7.0;
constexpr double kUnitwiseOpMin = 15.0;

// criterion 2
constexpr std::size_t kOracleNets = 20;
constexpr std::size_t kOracleSamples = 4;
constexpr double kOracleTolerance = 1e-10;

// criterion 3
constexpr std::size_t kMonteCarloDraws = 10000;
constexpr double kMonteCarloRelError = 0.05;

// criterion 7
constexpr double kFiniteDifferenceStep = 1e-6;
constexpr double kGradientRelError = 1e-5;
constexpr std::size_t kGradientNets = 5;

// criterion 8
constexpr std::size_t kQdSystems = 100;
constexpr double kQdResidual = 1e-10;
constexpr double kQdRegularization = 1e-4;
constexpr double kOutputLayerStepTolerance = 1e-12;

// criterion 9
constexpr std::size_t kOnlineSteps = 100;
constexpr double kOnlineDrift = 1e-6;
constexpr double kOnlineGamma = 0.01;
constexpr double kGeometricGamma = 0.05;
constexpr std::size_t kGeometricSteps = 200;
constexpr double kGeometricSlack = 1e-9;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

constexpr Interpretation kInterpretations[] = {Interpretation::square_loss, Interpretation::bernoulli,
                                               Interpretation::softmax, Interpretation::spherical};

// At most 6 units and at most 3 outputs.
Network oracle_net(std::uint64_t seed, Interpretation kind) {
    static const std::vector<std::vector<std::size_t>> shapes{{2, 1, 3}, {2, 2, 2}, {3, 3}, {1, 2, 3}, {2, 3, 1}};
    const auto act = seed % 2 ? ActivationKind::sigmoid : ActivationKind::tanh;
    return oracle::random_network(seed, shapes[seed % shapes.size()], act, kind, 0.8, 0.5);
}

// ---------------------------------------------------------------------------

Outcome autoencoder_losses() {
    auto run = [](OptimizerKind kind, ActivationKind act) {
        ExperimentConfig c;
        c.optimizer.kind = kind;
        c.optimizer.epsilon = kTableEpsilon;
        c.optimizer.seed = kTableSeed;
        c.activation = act;
        c.runs = kTableRuns;
        c.record_clock = false;
        const ExperimentSummary s = run_experiment(c).summary;
        return s.aborted == 0 ? s.mean_bits : std::nan("");
    };
    Outcome out;
    std::ostringstream text;
    auto require = [&](const char* name, double value, bool ok, const char* bound) {
        text << name << '=' << fmt("%.2f", value) << (ok ? "" : "(!)") << ' ' << bound << "; ";
        out.pass = out.pass && ok;
    };
    const auto sig = ActivationKind::sigmoid;
    const auto th = ActivationKind::tanh;

    const double bp_s = run(OptimizerKind::backprop, sig);
    require("backprop/sigm", bp_s, bp_s >= kBackpropSigmoidMin, ">=25");
    const double bp_t = run(OptimizerKind::backprop, th);
    require("backprop/tanh", bp_t, bp_t >= kBackpropTanhMin, ">=18");

    struct Bound {
        OptimizerKind kind;
        const char* name;
        double max;
    };
    for (const Bound& b : {Bound{OptimizerKind::unitwise_natural, "unitwise_natural", kUnitwiseNaturalMax},
                           Bound{OptimizerKind::backpropagated_metric, "backpropagated_metric", kBackpropagatedMetricMax},
                           Bound{OptimizerKind::qd_backpropagated_metric, "qd_backpropagated_metric",
                                 kQdBackpropagatedMetricMax},
                           Bound{OptimizerKind::qd_natural, "qd_natural", kQdNaturalMax}}) {
        for (ActivationKind act : {sig, th}) {
            const double v = run(b.kind, act);
            const std::string label = std::string(b.name) + (act == sig ? "/sigm" : "/tanh");
            require(label.c_str(), v, v <= b.max, ("<=" + fmt("%g", b.max)).c_str());
        }
    }

    const double gn_s = run(OptimizerKind::diagonal_gauss_newton, sig);
    const double gn_t = run(OptimizerKind::diagonal_gauss_newton, th);
    const bool gap = gn_s >= kDiagGaussNewtonRatio * gn_t || gn_s >= kDiagGaussNewtonSigmoidMin;
    require("diag_gn/sigm", gn_s, gap, ">=2x tanh or >=7");
    text << "diag_gn/tanh=" << fmt("%.2f", gn_t) << "; ";

    for (ActivationKind act : {sig, th}) {
        const double v = run(OptimizerKind::unitwise_op, act);
        require(act == sig ? "unitwise_op/sigm" : "unitwise_op/tanh", v, v >= kUnitwiseOpMin, ">=15");
    }
    out.detail = text.str();
    return out;
}

Outcome exact_fisher_oracle() {
    double worst_full = 0.0;
    double worst_square = 0.0;
    double worst_categorical = 0.0;
    for (std::uint64_t seed = 1; seed <= kOracleNets; ++seed) {
        for (Interpretation kind : kInterpretations) {
            const Network net = oracle_net(seed, kind);
            const ParameterSet p = random_params(net.topology(), seed, 1.5);
            const Dataset data = oracle::random_dataset(net.topology(), kind, seed, kOracleSamples);
            const double gap = oracle::max_abs_diff(full_fisher(net, p, data), oracle::full_fisher(net, p, data));
            if (kind == Interpretation::square_loss)
                worst_square = std::max(worst_square, gap);
            else
                worst_full = std::max(worst_full, gap);
            if (kind == Interpretation::softmax || kind == Interpretation::spherical) {
                for (const Sample& s : data) {
                    const auto u = decode_outputs(net, forward(net, p, s.input).a);
                    const OutputFisher f = interpretation_fisher(kind, u);
                    const Matrix brute = oracle::output_fisher(kind, u);
                    for (std::size_t a = 0; a < u.size(); ++a)
                        for (std::size_t b = 0; b < u.size(); ++b)
                            worst_categorical = std::max(worst_categorical, std::abs(f.entry(a, b) - brute(a, b)));
                }
            }
        }
    }
    Outcome out;
    out.pass = worst_full <= kOracleTolerance && worst_square <= kOracleTolerance &&
               worst_categorical <= kOracleTolerance;
    out.detail = "enumerated max|dF|=" + fmt("%.2e", worst_full) + ", square-loss max|dF|=" +
                 fmt("%.2e", worst_square) + ", softmax/spherical output blocks max|dF|=" +
                 fmt("%.2e", worst_categorical) + " (tol 1e-10, " + std::to_string(kOracleNets) + " nets)";
    return out;
}

Outcome monte_carlo_consistency() {
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= kOracleNets; ++seed) {
        const Network net = oracle_net(seed, Interpretation::bernoulli);
        const ParameterSet p = random_params(net.topology(), seed, 1.5);
        const Dataset data = oracle::random_dataset(net.topology(), Interpretation::bernoulli, seed, kOracleSamples);
        const MetricBatch exact = unitwise_fisher(net, p, data);
        const MetricBatch mc = monte_carlo_fisher(net, p, data, kMonteCarloDraws, seed);
        for (UnitId k : net.topology().trainable_units()) {
            const Matrix a = exact.blocks[k].full().to_dense();
            Matrix d = mc.blocks[k].full().to_dense();
            for (std::size_t i = 0; i < d.values().size(); ++i) d.values()[i] -= a.values()[i];
            errors.push_back(frobenius_norm(d) / frobenius_norm(a));
        }
    }
    std::sort(errors.begin(), errors.end());
    const double worst = errors.back();
    const auto over = std::count_if(errors.begin(), errors.end(), [](double e) { return !(e <= kMonteCarloRelError); });
    return {over == 0, "worst relative Frobenius error " + fmt("%.4f", worst) + ", median " +
                           fmt("%.4f", errors[errors.size() / 2]) + ", " + std::to_string(over) + " of " +
                           std::to_string(errors.size()) + " blocks above tol 0.05 (K=" +
                           std::to_string(kMonteCarloDraws) + ")"};
}

Outcome invariance_audit(const AuditReport& report) {
    Outcome out;
    std::ostringstream text;
    const std::set<std::string> reparam_pass{"unitwise_natural", "qd_natural", "backpropagated_metric",
                                             "qd_backpropagated_metric", "unitwise_op"};
    const std::set<std::string> recomb_pass{"unitwise_natural", "backpropagated_metric", "unitwise_op"};
    const std::set<std::string> reparam_fail{"backprop", "diagonal_gauss_newton", "adagrad"};
    std::set<std::string> seen;
    double worst_pass = 0.0;
    double weakest_fail = std::numeric_limits<double>::infinity();
    for (const AuditEntry& e : report.entries) {
        const bool reparam = e.property == "reparametrization";
        const bool recomb = e.property == "recombination";
        if (!reparam && !recomb) continue;
        if ((reparam && reparam_pass.count(e.optimizer)) || (recomb && recomb_pass.count(e.optimizer))) {
            seen.insert(e.property + "/" + e.optimizer);
            worst_pass = std::max(worst_pass, e.deviation);
            if (!(e.deviation <= kInvarianceTolerance)) {
                out.pass = false;
                text << e.property << '/' << e.optimizer << '/' << e.network << " deviates " << fmt("%.2e", e.deviation)
                     << "; ";
            }
        }
        if (reparam && reparam_fail.count(e.optimizer)) {
            seen.insert(e.property + "/" + e.optimizer);
            weakest_fail = std::min(weakest_fail, e.deviation);
            if (!(e.deviation > kSensitivityThreshold)) {
                out.pass = false;
                text << "reparametrization/" << e.optimizer << '/' << e.network << " insensitive ("
                     << fmt("%.2e", e.deviation) << "); ";
            }
        }
    }
    const std::size_t expected = reparam_pass.size() + recomb_pass.size() + reparam_fail.size();
    if (seen.size() != expected) {
        out.pass = false;
        text << "only " << seen.size() << " of " << expected << " (property, optimizer) pairs audited; ";
    }
    text << "max invariant deviation " << fmt("%.2e", worst_pass) << " (tol 1e-8), min baseline deviation "
         << fmt("%.2e", weakest_fail) << " (> 1e-3)";
    out.detail = text.str();
    return out;
}

Outcome best_fit(const AuditReport& report, std::size_t networks) {
    Outcome out;
    double worst = 0.0;
    std::map<std::string, std::set<std::string>> nets;
    for (const AuditEntry& e : report.entries) {
        if (e.property != "best_fit") continue;
        nets[e.optimizer].insert(e.network);
        worst = std::max(worst, e.deviation);
        if (!(e.deviation <= kBestFitTolerance)) out.pass = false;
    }
    for (const char* kind : {"unitwise_natural", "backpropagated_metric", "unitwise_op"})
        if (nets[kind].size() != networks) out.pass = false;
    out.detail = "worst deviation " + fmt("%.2e", worst) + " over " + std::to_string(networks) +
                 " nets x 3 optimizers (tol 1e-8)";
    return out;
}

Outcome equalizer(const AuditReport& report, std::size_t instances) {
    Outcome out;
    double smallest = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    for (const AuditEntry& e : report.entries) {
        if (e.property != "equalizer") continue;
        ++count;
        smallest = std::min(smallest, e.deviation);
        if (!(e.deviation > kEqualizerMargin)) out.pass = false;
    }
    if (count != instances) out.pass = false;
    out.detail = std::to_string(count) + " instances x 200 competitors, smallest relative variance excess " +
                 fmt("%.3e", smallest) + " (margin 1e-6)";
    return out;
}

Outcome gradient_correctness() {
    double worst = 0.0;
    for (Interpretation kind : kInterpretations) {
        for (ActivationKind act : {ActivationKind::sigmoid, ActivationKind::tanh}) {
            for (std::uint64_t seed = 1; seed <= kGradientNets; ++seed) {
                const Network net = oracle::network(seed, {4, 5, 3}, act, kind);
                const ParameterSet p = random_params(net.topology(), seed, 1.5);
                const Dataset data = oracle::random_dataset(net.topology(), kind, seed, 8);
                const ParameterSet g = gradient_blocks(net, p, data);
                const auto f = [&](const std::vector<double>& theta) {
                    ParameterSet q = p;
                    std::copy(theta.begin(), theta.end(), q.values().begin());
                    return mean_loss(net, q, data);
                };
                double num = 0.0;
                double den = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double fd = -oracle::central_difference(f, oracle::flat(p), i, kFiniteDifferenceStep);
                    num += (g.values()[i] - fd) * (g.values()[i] - fd);
                    den += fd * fd;
                }
                worst = std::max(worst, std::sqrt(num / den));
            }
        }
    }
    return {worst <= kGradientRelError,
            "worst relative error " + fmt("%.2e", worst) + " over 4 interpretations x 2 activations (tol 1e-5)"};
}

Outcome quasi_diagonal_algebra() {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst_residual = 0.0;
    for (std::size_t t = 0; t < kQdSystems; ++t) {
        const std::size_t m = 1 + t % 10;
        SymMatrix a(m + 1);
        std::vector<double> z(m + 1);
        for (std::size_t s = 0; s < m + 3; ++s) {
            z[0] = 1.0;
            for (std::size_t i = 1; i <= m; ++i) z[i] = normal(rng);
            a.add_rank_one(std::abs(normal(rng)), z);
        }
        QuasiDiagonal qd = quasi_diagonal_reduce(a);
        qd.a00 += kQdRegularization;
        for (double& d : qd.diag) d += kQdRegularization;
        std::vector<double> b(m + 1);
        for (double& v : b) v = normal(rng);
        const auto w = qd_solve(qd, b);
        const auto aw = materialize_qd(qd).multiply(w);
        for (std::size_t i = 0; i <= m; ++i) worst_residual = std::max(worst_residual, std::abs(aw[i] - b[i]));
    }

    double worst_output_gap = 0.0;
    for (Interpretation kind : {Interpretation::bernoulli, Interpretation::square_loss}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto act = seed % 2 ? ActivationKind::sigmoid : ActivationKind::tanh;
            const Network net = oracle::network(seed, {4, 5, 3}, act, kind);
            const ParameterSet p = random_params(net.topology(), seed, 1.5);
            const Dataset data = oracle::random_dataset(net.topology(), kind, seed, 16);
            const ParameterSet a = step_unitwise_natural(net, p, data, 1.0, 1e-4);
            const ParameterSet b = step_backpropagated_metric(net, p, data, 1.0, 1e-4);
            for (UnitId k : net.topology().outputs())
                for (std::size_t i = 0; i < a.block(k).size(); ++i)
                    worst_output_gap = std::max(worst_output_gap, std::abs(a.at(k, i) - b.at(k, i)) /
                                                              std::max(1.0, std::abs(a.at(k, i) - p.at(k, i))));
        }
    }
    return {worst_residual <= kQdResidual && worst_output_gap <= kOutputLayerStepTolerance,
            "max |Aw-b| " + fmt("%.2e", worst_residual) + " on 100 systems (tol 1e-10); output-layer step gap " +
                fmt("%.2e", worst_output_gap) + " (tol 1e-12)"};
}

Outcome online_mode() {
    const Network net = oracle::network(5, {4, 4, 3, 2}, ActivationKind::tanh, Interpretation::bernoulli, 0.8, 0.2);
    const ParameterSet p0 = random_params(net.topology(), 5, 1.0);
    const Dataset data = oracle::random_dataset(net.topology(), Interpretation::bernoulli, 5, 20 + kOnlineSteps);
    const Dataset init(data.begin(), data.begin() + 20);

    double drift = 0.0;
    for (OptimizerKind kind : {OptimizerKind::unitwise_natural, OptimizerKind::backpropagated_metric,
                               OptimizerKind::unitwise_op}) {
        OptimizerConfig c;
        c.kind = kind;
        c.gamma = kOnlineGamma;
        OnlineTrainer t(net, p0, init, c);
        ParameterSet p = p0;
        for (std::size_t n = 0; n < kOnlineSteps; ++n) t.step(p, data[20 + n], 0.01);
        for (UnitId k : net.topology().trainable_units()) {
            const Matrix direct = inverse_spd(t.metric(k).full());
            double s = 0.0;
            for (std::size_t i = 0; i < direct.values().size(); ++i)
                s += std::pow(direct.values()[i] - t.inverse(k).values()[i], 2);
            drift = std::max(drift, std::sqrt(s));
        }
    }

    // repeated sample with frozen parameters: |A(t) - A(x)| <= (1 - gamma)^t |A(0) - A(x)|
    bool geometric = true;
    double worst_ratio = 0.0;
    for (OptimizerKind kind : {OptimizerKind::unitwise_natural, OptimizerKind::qd_natural}) {
        OptimizerConfig c;
        c.kind = kind;
        c.gamma = kGeometricGamma;
        OnlineTrainer t(net, p0, init, c);
        const Dataset x{data[25]};
        const MetricBatch target = accumulate_metric(net, p0, x, {metric_of(kind), shape_of(kind)}, Execution::serial);
        std::vector<double> g0;
        for (UnitId k : net.topology().trainable_units())
            g0.push_back(oracle::block_distance(t.metric(k), target.blocks[k]));
        ParameterSet p = p0;
        for (std::size_t step = 1; step <= kGeometricSteps; ++step) {
            t.step(p, x[0], 0.0);
            const double bound = std::pow(1.0 - kGeometricGamma, static_cast<double>(step));
            std::size_t i = 0;
            for (UnitId k : net.topology().trainable_units()) {
                const double gap = oracle::block_distance(t.metric(k), target.blocks[k]);
                const double ratio = g0[i] > 0.0 ? gap / (g0[i] * bound) : 0.0;
                worst_ratio = std::max(worst_ratio, ratio);
                if (gap > bound * g0[i] * (1.0 + kGeometricSlack) + 1e-15) geometric = false;
                ++i;
            }
        }
    }
    return {drift <= kOnlineDrift && geometric,
            "inverse drift " + fmt("%.2e", drift) + " after 100 steps (tol 1e-6); geometric contraction " +
                (geometric ? std::string("holds") : std::string("violated")) + ", max |A(t)-A(x)| / bound " +
                fmt("%.6f", worst_ratio)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

    AuditConfig audit;
    std::optional<AuditReport> report;
    auto audited = [&]() -> const AuditReport& {
        if (!report) report = audit_invariance(audit);
        return *report;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"auto-encoder final losses (20 runs, default budgets, eps 1e-4)", autoencoder_losses},
        {"exact Fisher oracle", exact_fisher_oracle},
        {"Monte Carlo consistency", monte_carlo_consistency},
        {"invariance audit", [&] { return invariance_audit(audited()); }},
        {"best-fit equivalence", [&] { return best_fit(audited(), audit.best_fit_networks); }},
        {"equalizer property", [&] { return equalizer(audited(), audit.equalizer_instances); }},
        {"gradient correctness", gradient_correctness},
        {"quasi-diagonal algebra", quasi_diagonal_algebra},
        {"online mode", online_mode},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        if (!wanted(n)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("%s criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
