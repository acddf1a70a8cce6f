#include "invnet/kernels.hpp"

#include <random>
#include <stdexcept>

#include "invnet/backprop.hpp"
#include "invnet/interpretation.hpp"
#include "sweeps.hpp"

namespace invnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Binary-counter pairwise summation of equal-width leaf vectors. The tree only
// depends on the number of leaves, so results do not depend on scheduling.
class PairwiseAccumulator {
public:
    explicit PairwiseAccumulator(std::size_t width) : width_(width), carry_(width) {}

    std::span<double> leaf() { return carry_; }

    void push() {
        std::size_t level = 0;
        while (level < levels_.size() && full_[level]) {
            const auto& left = levels_[level];
            for (std::size_t i = 0; i < width_; ++i) carry_[i] = left[i] + carry_[i];
            full_[level] = false;
            ++level;
        }
        if (level == levels_.size()) {
            levels_.emplace_back(width_);
            full_.push_back(false);
        }
        levels_[level].swap(carry_);
        full_[level] = true;
    }

    std::vector<double> finish() {
        std::vector<double> total(width_, 0.0);
        bool any = false;
        for (std::size_t level = 0; level < levels_.size(); ++level) {
            if (!full_[level]) continue;
            const auto& left = levels_[level];
            if (!any) {
                total = left;
                any = true;
            } else {
                for (std::size_t i = 0; i < width_; ++i) total[i] = left[i] + total[i];
            }
        }
        return total;
    }

private:
    std::size_t width_;
    std::vector<double> carry_;
    std::vector<std::vector<double>> levels_;
    std::vector<bool> full_;
};

void sweep_one(const Network& net, const ParameterSet& eff, const Sample& sample, std::size_t n,
               const SweepRequest& request, SampleSweep& out) {
    const auto& topo = net.topology();
    const std::size_t units = topo.unit_count();
    const std::size_t n_out = topo.outputs().size();
    std::span<double> a(out.activity.data() + n * units, units);
    std::span<double> rb(out.reduced_b.data() + n * units, units);
    std::vector<double> r(units);
    std::vector<double> b(units);

    sweep::forward(net, eff, sample.input, a, r);
    const auto u = decode_outputs(net, a);
    out.loss[n] = interpretation_loss(net.interpretation(), u, sample.target);
    sweep::backward(net, eff, r, u, sample.target, b);
    for (std::size_t k = 0; k < units; ++k) rb[k] = r[k] * b[k];

    if (request.metric == MetricKind::none) return;
    std::span<double> w(out.weight.data() + n * units, units);
    switch (request.metric) {
        case MetricKind::none:
            break;
        case MetricKind::fisher: {
            TransferRates rates(units, n_out);
            sweep::transfer_rates(net, eff, r, rates);
            const OutputFisher fisher = sweep::activity_fisher(net, u);
            for (UnitId k : topo.trainable_units()) w[k] = r[k] * r[k] * sweep::modulus_from_row(fisher, rates.row(k));
            break;
        }
        case MetricKind::backpropagated: {
            const OutputFisher fisher = sweep::activity_fisher(net, u);
            std::vector<double> m(units);
            sweep::backprop_modulus(net, eff, r, fisher, m);
            for (UnitId k : topo.trainable_units()) w[k] = r[k] * r[k] * m[k];
            break;
        }
        case MetricKind::outer_product:
            for (UnitId k : topo.trainable_units()) w[k] = rb[k] * rb[k];
            break;
        case MetricKind::monte_carlo: {
            std::mt19937_64 rng(monte_carlo_seed(request.seed, request.stream, n));
            std::vector<double> y(n_out);
            const double inv = 1.0 / static_cast<double>(request.mc_samples);
            for (std::size_t s = 0; s < request.mc_samples; ++s) {
                sample_target(net.interpretation(), u, rng, y);
                sweep::backward(net, eff, r, u, y, b);
                for (UnitId k : topo.trainable_units()) {
                    const double v = r[k] * b[k];
                    w[k] += inv * v * v;
                }
            }
            break;
        }
    }
}

std::size_t leaf_width(MetricKind metric, BlockShape shape, std::size_t p) {
    if (metric == MetricKind::none) return p;
    if (shape == BlockShape::full) return SymMatrix::packed_size(p) + p;
    return 2 * p - 1 + p;
}

void accumulate_unit(const Network& net, const SampleSweep& sweep, const SweepRequest& request, UnitId k,
                     MetricBatch& batch) {
    auto grad = batch.gradient.block(k);
    const std::size_t p = grad.size();
    const std::size_t width = leaf_width(request.metric, request.shape, p);
    const std::size_t metric_width = width - p;
    PairwiseAccumulator acc(width);
    std::vector<double> z(p);
    for (std::size_t n = 0; n < sweep.samples; ++n) {
        unit_features(net, k, sweep.activity_row(n), z);
        auto leaf = acc.leaf();
        if (request.metric != MetricKind::none) {
            const double w = sweep.weight[n * sweep.units + k];
            if (request.shape == BlockShape::full) {
                std::size_t idx = 0;
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t j = 0; j <= i; ++j) leaf[idx++] = w * z[i] * z[j];
            } else {
                leaf[0] = w;
                for (std::size_t i = 1; i < p; ++i) {
                    leaf[i] = w * z[i];
                    leaf[p - 1 + i] = w * z[i] * z[i];
                }
            }
        }
        const double rb = sweep.reduced_b[n * sweep.units + k];
        for (std::size_t i = 0; i < p; ++i) leaf[metric_width + i] = z[i] * rb;
        acc.push();
    }
    std::vector<double> total = acc.finish();
    const double inv = 1.0 / static_cast<double>(sweep.samples);
    for (double& v : total) v *= inv;
    for (std::size_t i = 0; i < p; ++i) grad[i] = total[metric_width + i];

    UnitMetricBlock& block = batch.blocks[k];
    block.unit = k;
    if (request.metric == MetricKind::none) return;
    if (request.shape == BlockShape::full) {
        total.resize(metric_width);
        block.entries = SymMatrix::from_packed(p, std::move(total));
    } else {
        QuasiDiagonal qd;
        qd.a00 = total[0];
        qd.a0.assign(total.begin() + 1, total.begin() + static_cast<std::ptrdiff_t>(p));
        qd.diag.assign(total.begin() + static_cast<std::ptrdiff_t>(p),
                       total.begin() + static_cast<std::ptrdiff_t>(2 * p - 1));
        block.entries = std::move(qd);
    }
}

}  // namespace

std::size_t UnitMetricBlock::order() const {
    return is_quasi_diagonal() ? qd().order() : full().order();
}

std::vector<double> UnitMetricBlock::solve(std::span<const double> g, double eps) const {
    if (g.size() != order()) throw std::invalid_argument("UnitMetricBlock::solve: dimension mismatch");
    if (!is_quasi_diagonal()) return solve_spd(full(), g, eps);
    QuasiDiagonal reg = qd();
    reg.a00 += eps;
    for (double& d : reg.diag) d += eps;
    return qd_solve(reg, g);
}

std::uint64_t monte_carlo_seed(std::uint64_t seed, std::uint64_t stream, std::size_t sample) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ static_cast<std::uint64_t>(sample));
}

SampleSweep sweep_samples(const Network& net, const ParameterSet& params, const Dataset& data,
                          const SweepRequest& request, Execution execution) {
    if (data.empty()) throw std::invalid_argument("sweep_samples: empty dataset");
    if (request.metric == MetricKind::monte_carlo && request.mc_samples == 0)
        throw std::invalid_argument("Monte Carlo metric needs at least one sample");
    validate_dataset(net, data);
    const ParameterSet eff = effective_weights(net, params);
    SampleSweep out;
    out.units = net.topology().unit_count();
    out.samples = data.size();
    out.activity.assign(out.units * out.samples, 0.0);
    out.reduced_b.assign(out.units * out.samples, 0.0);
    if (request.metric != MetricKind::none) out.weight.assign(out.units * out.samples, 0.0);
    out.loss.assign(out.samples, 0.0);

    const auto count = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
    for (std::ptrdiff_t n = 0; n < count; ++n)
        sweep_one(net, eff, data[static_cast<std::size_t>(n)], static_cast<std::size_t>(n), request, out);
    return out;
}

MetricBatch accumulate_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                              const SweepRequest& request, Execution execution) {
    const SampleSweep sweep = sweep_samples(net, params, data, request, execution);
    const auto& topo = net.topology();
    MetricBatch batch;
    batch.gradient = ParameterSet(topo);
    batch.blocks.resize(topo.unit_count());
    for (UnitId k = 0; k < topo.unit_count(); ++k) batch.blocks[k].unit = k;

    const auto units = topo.trainable_units();
    const auto count = static_cast<std::ptrdiff_t>(units.size());
#pragma omp parallel for schedule(dynamic) if (execution == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        accumulate_unit(net, sweep, request, units[static_cast<std::size_t>(i)], batch);

    double total = 0.0;
    for (double l : sweep.loss) total += l;
    batch.mean_loss = total / static_cast<double>(sweep.samples);
    return batch;
}

double evaluate_loss(const Network& net, const ParameterSet& params, const Dataset& data, Execution execution) {
    if (data.empty()) throw std::invalid_argument("evaluate_loss: empty dataset");
    validate_dataset(net, data);
    const ParameterSet eff = effective_weights(net, params);
    const std::size_t units = net.topology().unit_count();
    std::vector<double> losses(data.size());
    const auto count = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
    for (std::ptrdiff_t n = 0; n < count; ++n) {
        std::vector<double> a(units);
        std::vector<double> r(units);
        const Sample& s = data[static_cast<std::size_t>(n)];
        sweep::forward(net, eff, s.input, a, r);
        losses[static_cast<std::size_t>(n)] =
            interpretation_loss(net.interpretation(), decode_outputs(net, a), s.target);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(data.size());
}

}  // namespace invnet
