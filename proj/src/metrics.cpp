#include "invnet/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "invnet/backprop.hpp"
#include "invnet/interpretation.hpp"

namespace invnet {

namespace {

MetricBatch build(const Network& net, const ParameterSet& params, const Dataset& data, MetricKind kind,
                  BlockShape shape, Execution execution) {
    SweepRequest request;
    request.metric = kind;
    request.shape = shape;
    return accumulate_metric(net, params, data, request, execution);
}

void check_full_size(const Network& net, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("full metric: empty dataset");
    if (net.topology().parameter_count() > kFullMetricParameterLimit)
        throw std::length_error("full metric: " + std::to_string(net.topology().parameter_count()) +
                                " parameters exceed the oracle limit");
}

// Row of each parameter in the flat index and its feature value for one sample.
std::vector<double> flat_features(const Network& net, const ForwardState& state, const ParameterSet& layout) {
    std::vector<double> z(layout.size());
    for (UnitId k : net.topology().trainable_units()) {
        std::span<double> block(z.data() + layout.offset(k), layout.block(k).size());
        unit_features(net, k, state.a, block);
    }
    return z;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

MetricBatch unitwise_fisher(const Network& net, const ParameterSet& params, const Dataset& data, BlockShape shape,
                            Execution execution) {
    return build(net, params, data, MetricKind::fisher, shape, execution);
}

MetricBatch backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                  BlockShape shape, Execution execution) {
    return build(net, params, data, MetricKind::backpropagated, shape, execution);
}

MetricBatch op_metric(const Network& net, const ParameterSet& params, const Dataset& data, BlockShape shape,
                      Execution execution) {
    return build(net, params, data, MetricKind::outer_product, shape, execution);
}

MetricBatch monte_carlo_fisher(const Network& net, const ParameterSet& params, const Dataset& data,
                               std::size_t samples, std::uint64_t seed, BlockShape shape, Execution execution,
                               std::uint64_t stream) {
    if (samples == 0) throw std::invalid_argument("monte_carlo_fisher: K must be at least 1");
    SweepRequest request;
    request.metric = MetricKind::monte_carlo;
    request.shape = shape;
    request.mc_samples = samples;
    request.seed = seed;
    request.stream = stream;
    return accumulate_metric(net, params, data, request, execution);
}

Matrix full_fisher(const Network& net, const ParameterSet& params, const Dataset& data) {
    check_full_size(net, data);
    validate_dataset(net, data);
    const auto& topo = net.topology();
    const ParameterSet layout(topo);
    const std::size_t n = layout.size();
    Matrix f(n, n);
    const auto units = topo.trainable_units();
    for (const Sample& s : data) {
        const ForwardState state = forward(net, params, s.input);
        const TransferRates rates = transfer_rates(net, params, state);
        const auto z = flat_features(net, state, layout);
        for (UnitId k : units) {
            for (UnitId k2 : units) {
                const double coeff =
                    state.r[k] * state.r[k2] * cross_fisher_modulus(net, rates, state, k, k2);
                if (coeff == 0.0) continue;
                for (std::size_t i = layout.offset(k); i < layout.offset(k) + layout.block(k).size(); ++i)
                    for (std::size_t j = layout.offset(k2); j < layout.offset(k2) + layout.block(k2).size(); ++j)
                        f(i, j) += coeff * z[i] * z[j];
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (double& v : f.values()) v *= inv;
    return f;
}

Matrix full_op_metric(const Network& net, const ParameterSet& params, const Dataset& data) {
    check_full_size(net, data);
    validate_dataset(net, data);
    const std::size_t n = params.size();
    Matrix m(n, n);
    for (const Sample& s : data) {
        const ForwardState state = forward(net, params, s.input);
        const BackwardState back = backpropagate(net, params, state, s.target);
        const ParameterSet g = sample_gradient(net, params, state, back);
        const auto gv = g.values();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += gv[i] * gv[j];
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (double& v : m.values()) v *= inv;
    return m;
}

QuasiDiagonal quasi_diagonal_reduce(const SymMatrix& a) {
    if (a.order() == 0 || !(a(0, 0) > 0.0)) throw NumericalError("quasi_diagonal_reduce: A_00 must be positive");
    QuasiDiagonal qd;
    qd.a00 = a(0, 0);
    for (std::size_t i = 1; i < a.order(); ++i) {
        qd.a0.push_back(a(0, i));
        qd.diag.push_back(a(i, i));
    }
    return qd;
}

void dump_matrix(std::ostream& out, std::string_view label, const Matrix& m) {
    out << "# " << label << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void dump_blocks(std::ostream& out, const MetricBatch& batch) {
    for (const UnitMetricBlock& block : batch.blocks) {
        if (block.order() == 0) continue;
        const std::string label = "unit " + std::to_string(block.unit);
        if (block.is_quasi_diagonal()) {
            // a00 = E[weight] = 0 only when the whole block vanishes
            const QuasiDiagonal& qd = block.qd();
            const Matrix dense = qd.a00 > 0.0 ? materialize_qd(qd).to_dense() : Matrix(qd.order(), qd.order());
            dump_matrix(out, label + " qd", dense);
        } else {
            dump_matrix(out, label, block.full().to_dense());
        }
    }
}

}  // namespace invnet
