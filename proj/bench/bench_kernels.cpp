// Serial reference vs OpenMP kernels on the auto-encoder.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "invnet/experiment.hpp"
#include "invnet/kernels.hpp"

using namespace invnet;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t samples = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 256;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    const Network net(generate_autoencoder(1), ActivationKind::sigmoid, Interpretation::bernoulli);
    const Dataset data = generate_dataset(2, samples);
    const ParameterSet params = initialize_params(net.topology(), ActivationKind::sigmoid, 3);

    std::printf("threads %d, samples %zu\n", omp_get_max_threads(), samples);
    std::printf("%-16s %-6s %12s %12s %8s %s\n", "metric", "shape", "serial_s", "parallel_s", "speedup", "identical");
    const struct {
        const char* name;
        MetricKind kind;
    } metrics[] = {{"gradient", MetricKind::none},           {"fisher", MetricKind::fisher},
                   {"backpropagated", MetricKind::backpropagated}, {"outer_product", MetricKind::outer_product},
                   {"monte_carlo", MetricKind::monte_carlo}};
    bool all_identical = true;
    for (const auto& m : metrics) {
        for (BlockShape shape : {BlockShape::full, BlockShape::quasi_diagonal}) {
            if (m.kind == MetricKind::none && shape == BlockShape::quasi_diagonal) continue;
            SweepRequest request;
            request.metric = m.kind;
            request.shape = shape;
            request.seed = 4;
            MetricBatch serial, parallel;
            const double ts = best_of(reps, [&] { serial = accumulate_metric(net, params, data, request, Execution::serial); });
            const double tp =
                best_of(reps, [&] { parallel = accumulate_metric(net, params, data, request, Execution::parallel); });
            bool identical = serial.gradient == parallel.gradient && serial.mean_loss == parallel.mean_loss;
            for (std::size_t k = 0; identical && k < serial.blocks.size(); ++k) {
                const auto& a = serial.blocks[k];
                const auto& b = parallel.blocks[k];
                identical = a.is_quasi_diagonal() == b.is_quasi_diagonal();
                if (!identical) break;
                if (a.is_quasi_diagonal())
                    identical = a.qd().a00 == b.qd().a00 && a.qd().a0 == b.qd().a0 && a.qd().diag == b.qd().diag;
                else
                    identical = std::equal(a.full().packed().begin(), a.full().packed().end(),
                                           b.full().packed().begin(), b.full().packed().end());
            }
            all_identical = all_identical && identical;
            std::printf("%-16s %-6s %12.6f %12.6f %8.2f %s\n", m.name,
                        shape == BlockShape::full ? "full" : "qd", ts, tp, ts / tp, identical ? "yes" : "NO");
        }
    }
    return all_identical ? 0 : 1;
}
