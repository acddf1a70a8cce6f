#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <random>

#include "invnet/experiment.hpp"
#include "invnet/kernels.hpp"
#include "invnet/metrics.hpp"
#include "oracles.hpp"

using namespace invnet;

namespace {

std::vector<double> flatten(const MetricBatch& b) {
    std::vector<double> out(b.gradient.values().begin(), b.gradient.values().end());
    out.push_back(b.mean_loss);
    for (const UnitMetricBlock& blk : b.blocks) {
        if (blk.is_quasi_diagonal()) {
            const QuasiDiagonal& q = blk.qd();
            out.push_back(q.a00);
            out.insert(out.end(), q.a0.begin(), q.a0.end());
            out.insert(out.end(), q.diag.begin(), q.diag.end());
        } else {
            const auto p = blk.full().packed();
            out.insert(out.end(), p.begin(), p.end());
        }
    }
    return out;
}

constexpr MetricKind kMetrics[] = {MetricKind::none, MetricKind::fisher, MetricKind::backpropagated,
                                   MetricKind::outer_product, MetricKind::monte_carlo};

}  // namespace

TEST_CASE("serial and parallel accumulation are bit-identical") {
    omp_set_num_threads(4);
    const Network net(generate_autoencoder(3), ActivationKind::tanh, Interpretation::bernoulli);
    const ParameterSet p = initialize_params(net.topology(), ActivationKind::tanh, 3);
    const Dataset data = encode_inputs(generate_dataset(3, 37), ActivationKind::tanh);
    for (MetricKind metric : kMetrics) {
        for (BlockShape shape : {BlockShape::full, BlockShape::quasi_diagonal}) {
            const SweepRequest req{metric, shape, 2, 11, 5};
            const auto serial = flatten(accumulate_metric(net, p, data, req, Execution::serial));
            const auto parallel = flatten(accumulate_metric(net, p, data, req, Execution::parallel));
            CHECK(serial == parallel);
        }
    }
    CHECK(evaluate_loss(net, p, data, Execution::serial) == evaluate_loss(net, p, data, Execution::parallel));
}

TEST_CASE("per-sample sweep is consistent with the public api") {
    const Network net = oracle::network(2, {3, 4, 2}, ActivationKind::sigmoid, Interpretation::softmax);
    const ParameterSet p = random_params(net.topology(), 2, 1.5);
    const Dataset data = oracle::random_dataset(net.topology(), Interpretation::softmax, 2, 6);
    const SampleSweep sw = sweep_samples(net, p, data, {MetricKind::outer_product}, Execution::serial);
    CHECK(sw.samples == 6);
    CHECK(sw.units == net.topology().unit_count());
    for (std::size_t n = 0; n < data.size(); ++n) {
        const auto s = forward(net, p, data[n].input);
        const auto row = sw.activity_row(n);
        for (std::size_t k = 0; k < sw.units; ++k) CHECK(row[k] == s.a[k]);
        CHECK(sw.loss[n] == doctest::Approx(loss(net, s, data[n].target)).epsilon(1e-15));
    }
    CHECK(evaluate_loss(net, p, data, Execution::serial) == doctest::Approx(mean_loss(net, p, data)).epsilon(1e-15));
}

TEST_CASE("accumulation is insensitive to sample order up to reassociation") {
    const Network net = oracle::network(4, {5, 6, 4}, ActivationKind::tanh, Interpretation::bernoulli);
    const ParameterSet p = random_params(net.topology(), 4, 1.5);
    Dataset data = oracle::random_dataset(net.topology(), Interpretation::bernoulli, 4, 33);
    const auto a = flatten(accumulate_metric(net, p, data, {MetricKind::fisher}, Execution::serial));
    std::shuffle(data.begin(), data.end(), std::mt19937_64(1));
    const auto b = flatten(accumulate_metric(net, p, data, {MetricKind::fisher}, Execution::serial));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])));
}

TEST_CASE("monte carlo seeds") {
    CHECK(monte_carlo_seed(1, 2, 3) == monte_carlo_seed(1, 2, 3));
    CHECK(monte_carlo_seed(1, 2, 3) != monte_carlo_seed(1, 2, 4));
    CHECK(monte_carlo_seed(1, 2, 3) != monte_carlo_seed(1, 3, 3));
    CHECK(monte_carlo_seed(1, 2, 3) != monte_carlo_seed(2, 2, 3));
    const Network net = oracle::network(5, {3, 3, 2}, ActivationKind::sigmoid, Interpretation::bernoulli);
    const ParameterSet p = random_params(net.topology(), 5);
    const Dataset data = oracle::random_dataset(net.topology(), Interpretation::bernoulli, 5, 8);
    const SweepRequest r1{MetricKind::monte_carlo, BlockShape::full, 1, 9, 0};
    const SweepRequest r2{MetricKind::monte_carlo, BlockShape::full, 1, 9, 1};
    CHECK(flatten(accumulate_metric(net, p, data, r1, Execution::serial)) !=
          flatten(accumulate_metric(net, p, data, r2, Execution::serial)));
}

TEST_CASE("metric block solves") {
    const Network net = oracle::network(6, {3, 4, 2}, ActivationKind::sigmoid, Interpretation::bernoulli);
    const ParameterSet p = random_params(net.topology(), 6);
    const Dataset data = oracle::random_dataset(net.topology(), Interpretation::bernoulli, 6, 10);
    const MetricBatch full = accumulate_metric(net, p, data, {MetricKind::fisher}, Execution::serial);
    const MetricBatch qd =
        accumulate_metric(net, p, data, {MetricKind::fisher, BlockShape::quasi_diagonal}, Execution::serial);
    for (UnitId k : net.topology().trainable_units()) {
        const auto g = full.gradient.block(k);
        const auto x = full.blocks[k].solve(g, 1e-4);
        CHECK(x == solve_spd(full.blocks[k].full(), g, 1e-4));
        QuasiDiagonal reg = qd.blocks[k].qd();
        reg.a00 += 1e-4;
        for (double& d : reg.diag) d += 1e-4;
        CHECK(qd.blocks[k].solve(g, 1e-4) == qd_solve(reg, g));
        CHECK(qd.blocks[k].order() == g.size());
    }
}

TEST_CASE("kernel input validation") {
    const Network net = oracle::network(7, {2, 2, 1}, ActivationKind::sigmoid, Interpretation::bernoulli);
    const ParameterSet p = random_params(net.topology(), 7);
    CHECK_THROWS(accumulate_metric(net, p, {}, {MetricKind::fisher}, Execution::serial));
    CHECK_THROWS(accumulate_metric(net, p, {{{1.0}, {1.0}}}, {MetricKind::fisher}, Execution::serial));
}
