#include "invnet/optimizers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace invnet {

namespace {

struct KindName {
    OptimizerKind kind;
    std::string_view name;
};

constexpr KindName kNames[] = {
    {OptimizerKind::backprop, "backprop"},
    {OptimizerKind::unitwise_natural, "unitwise_natural"},
    {OptimizerKind::qd_natural, "qd_natural"},
    {OptimizerKind::backpropagated_metric, "backpropagated_metric"},
    {OptimizerKind::qd_backpropagated_metric, "qd_backpropagated_metric"},
    {OptimizerKind::unitwise_op, "unitwise_op"},
    {OptimizerKind::mc_unitwise_natural, "mc_unitwise_natural"},
    {OptimizerKind::mc_qd_natural, "mc_qd_natural"},
    {OptimizerKind::diagonal_gauss_newton, "diagonal_gauss_newton"},
    {OptimizerKind::adagrad, "adagrad"},
};

OptimizerConfig with_kind(OptimizerKind kind, double epsilon) {
    OptimizerConfig c;
    c.kind = kind;
    c.epsilon = epsilon;
    return c;
}

ParameterSet take_step(const Network& net, const ParameterSet& params, const Dataset& data, OptimizerKind kind,
                       double eta, double epsilon) {
    return optimizer_step(net, params, data, with_kind(kind, epsilon), eta);
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
    for (const auto& n : kNames)
        if (n.kind == kind) return n.name;
    return "unknown";
}

OptimizerKind parse_optimizer(std::string_view name) {
    for (const auto& n : kNames)
        if (n.name == name) return n.kind;
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

MetricKind metric_of(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::backprop:
            return MetricKind::none;
        case OptimizerKind::unitwise_natural:
        case OptimizerKind::qd_natural:
            return MetricKind::fisher;
        case OptimizerKind::backpropagated_metric:
        case OptimizerKind::qd_backpropagated_metric:
        case OptimizerKind::diagonal_gauss_newton:
            return MetricKind::backpropagated;
        case OptimizerKind::unitwise_op:
        case OptimizerKind::adagrad:
            return MetricKind::outer_product;
        case OptimizerKind::mc_unitwise_natural:
        case OptimizerKind::mc_qd_natural:
            return MetricKind::monte_carlo;
    }
    return MetricKind::none;
}

BlockShape shape_of(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::qd_natural:
        case OptimizerKind::qd_backpropagated_metric:
        case OptimizerKind::mc_qd_natural:
        case OptimizerKind::diagonal_gauss_newton:
        case OptimizerKind::adagrad:
            return BlockShape::quasi_diagonal;
        default:
            return BlockShape::full;
    }
}

std::string config_to_json(const OptimizerConfig& config) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(config.kind));
    j["lr0"] = config.lr0;
    j["epsilon"] = config.epsilon;
    j["gamma"] = config.gamma;
    j["mc_samples"] = config.mc_samples;
    j["seed"] = config.seed;
    return j.dump();
}

OptimizerConfig config_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    OptimizerConfig c;
    c.kind = parse_optimizer(j.at("kind").get<std::string>());
    c.lr0 = j.value("lr0", c.lr0);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.gamma = j.value("gamma", c.gamma);
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    c.seed = j.value("seed", c.seed);
    return c;
}

Direction compute_direction(const Network& net, const ParameterSet& params, const Dataset& data,
                            const OptimizerConfig& config, std::uint64_t stream, Execution execution) {
    SweepRequest request;
    request.metric = metric_of(config.kind);
    request.shape = shape_of(config.kind);
    request.mc_samples = config.mc_samples;
    request.seed = config.seed;
    request.stream = stream;
    MetricBatch batch = accumulate_metric(net, params, data, request, execution);

    Direction dir;
    dir.loss = batch.mean_loss;
    dir.delta = ParameterSet(net.topology());
    for (UnitId k : net.topology().trainable_units()) {
        const auto g = batch.gradient.block(k);
        auto out = dir.delta.block(k);
        if (config.kind == OptimizerKind::backprop) {
            std::copy(g.begin(), g.end(), out.begin());
            continue;
        }
        UnitMetricBlock& block = batch.blocks[k];
        if (config.kind == OptimizerKind::adagrad) {
            const QuasiDiagonal& qd = block.qd();
            out[0] = g[0] / (std::sqrt(qd.a00) + kAdagradGuard);
            for (std::size_t i = 1; i < g.size(); ++i) out[i] = g[i] / (std::sqrt(qd.diag[i - 1]) + kAdagradGuard);
            continue;
        }
        if (config.kind == OptimizerKind::diagonal_gauss_newton)
            std::fill(block.qd().a0.begin(), block.qd().a0.end(), 0.0);
        const auto x = block.solve(g, config.epsilon);
        std::copy(x.begin(), x.end(), out.begin());
    }
    return dir;
}

ParameterSet optimizer_step(const Network& net, const ParameterSet& params, const Dataset& data,
                            const OptimizerConfig& config, double eta, std::uint64_t stream, Execution execution) {
    const Direction dir = compute_direction(net, params, data, config, stream, execution);
    ParameterSet out = params;
    out.add_scaled(dir.delta, eta);
    return out;
}

ParameterSet step_backprop(const Network& net, const ParameterSet& params, const Dataset& data, double eta) {
    return take_step(net, params, data, OptimizerKind::backprop, eta, 0.0);
}

ParameterSet step_unitwise_natural(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                                   double epsilon) {
    return take_step(net, params, data, OptimizerKind::unitwise_natural, eta, epsilon);
}

ParameterSet step_qd_natural(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                             double epsilon) {
    return take_step(net, params, data, OptimizerKind::qd_natural, eta, epsilon);
}

ParameterSet step_backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                        double eta, double epsilon) {
    return take_step(net, params, data, OptimizerKind::backpropagated_metric, eta, epsilon);
}

ParameterSet step_qd_backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                           double eta, double epsilon) {
    return take_step(net, params, data, OptimizerKind::qd_backpropagated_metric, eta, epsilon);
}

ParameterSet step_unitwise_op(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                              double epsilon) {
    return take_step(net, params, data, OptimizerKind::unitwise_op, eta, epsilon);
}

ParameterSet step_diagonal_gauss_newton(const Network& net, const ParameterSet& params, const Dataset& data,
                                        double eta, double epsilon) {
    return take_step(net, params, data, OptimizerKind::diagonal_gauss_newton, eta, epsilon);
}

ParameterSet step_adagrad(const Network& net, const ParameterSet& params, const Dataset& data, double eta) {
    return take_step(net, params, data, OptimizerKind::adagrad, eta, 0.0);
}

LearningRateController::LearningRateController(double eta0) : eta_(eta0) {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw std::invalid_argument("learning rate must be positive");
}

void LearningRateController::accept() {
    eta_ *= kGrowth;
    ++accepted_;
}

void LearningRateController::reject() {
    eta_ *= kShrink;
    ++rejected_;
}

EpochResult adaptive_epoch(const Network& net, ParameterSet& params, const Dataset& data,
                           const OptimizerConfig& config, LearningRateController& controller, std::uint64_t stream,
                           Execution execution) {
    const Direction dir = compute_direction(net, params, data, config, stream, execution);
    EpochResult result;
    result.eta = controller.eta();
    ParameterSet candidate = params;
    candidate.add_scaled(dir.delta, result.eta);
    const double loss = evaluate_loss(net, candidate, data, execution);
    if (loss < dir.loss) {
        params = std::move(candidate);
        controller.accept();
        result.accepted = true;
        result.loss = loss;
    } else {
        controller.reject();
        result.loss = dir.loss;
    }
    return result;
}

BatchTrainer::BatchTrainer(const Network& net, const Dataset& data, OptimizerConfig config, Execution execution)
    : net_(net), data_(data), config_(config), execution_(execution), controller_(config.lr0) {}

EpochResult BatchTrainer::epoch(ParameterSet& params) {
    if (!cached_) {
        cached_ = compute_direction(net_, params, data_, config_, directions_, execution_);
        ++directions_;
    }
    EpochResult result;
    result.eta = controller_.eta();
    ParameterSet candidate = params;
    candidate.add_scaled(cached_->delta, result.eta);
    const double loss = evaluate_loss(net_, candidate, data_, execution_);
    if (loss < cached_->loss) {
        params = std::move(candidate);
        controller_.accept();
        result.accepted = true;
        result.loss = loss;
        cached_.reset();
    } else {
        controller_.reject();
        result.loss = cached_->loss;
    }
    return result;
}

OnlineTrainer::OnlineTrainer(const Network& net, const ParameterSet& params, const Dataset& init,
                             OptimizerConfig config)
    : net_(net), config_(config) {
    const MetricKind metric = metric_of(config.kind);
    if (metric == MetricKind::none || config.kind == OptimizerKind::adagrad ||
        config.kind == OptimizerKind::diagonal_gauss_newton)
        throw std::invalid_argument("online mode needs a natural-gradient or outer-product optimizer");
    if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw std::invalid_argument("online discount must lie in [0, 1)");
    SweepRequest request;
    request.metric = metric;
    request.shape = shape_of(config.kind);
    request.mc_samples = config.mc_samples;
    request.seed = config.seed;
    request.stream = ~std::uint64_t{0};
    MetricBatch batch = accumulate_metric(net, params, init, request, Execution::serial);
    metric_ = std::move(batch.blocks);
    inverse_.resize(metric_.size());
    if (request.shape == BlockShape::full) {
        for (UnitId k : net.topology().trainable_units()) {
            metric_[k].full().add_to_diagonal(config.epsilon);
            inverse_[k] = inverse_spd(metric_[k].full());
        }
    }
}

void OnlineTrainer::step(ParameterSet& params, const Sample& sample, double eta) {
    SweepRequest request;
    request.metric = metric_of(config_.kind);
    request.shape = shape_of(config_.kind);
    request.mc_samples = config_.mc_samples;
    request.seed = config_.seed;
    request.stream = steps_;
    const Dataset one{sample};
    const SampleSweep sweep = sweep_samples(net_, params, one, request, Execution::serial);

    const double gamma = config_.gamma;
    const auto& topo = net_.topology();
    ParameterSet delta(topo);
    std::vector<double> z(topo.max_fan_in() + 1);
    for (UnitId k : topo.trainable_units()) {
        const std::size_t p = params.block(k).size();
        std::span<double> zk(z.data(), p);
        unit_features(net_, k, sweep.activity_row(0), zk);
        const double w = sweep.weight[k];
        const double rb = sweep.reduced_b[k];
        std::vector<double> g(p);
        for (std::size_t i = 0; i < p; ++i) g[i] = zk[i] * rb;

        UnitMetricBlock& block = metric_[k];
        std::vector<double> x;
        if (block.is_quasi_diagonal()) {
            QuasiDiagonal& qd = block.qd();
            qd.a00 = (1.0 - gamma) * qd.a00 + gamma * w;
            for (std::size_t i = 1; i < p; ++i) {
                qd.a0[i - 1] = (1.0 - gamma) * qd.a0[i - 1] + gamma * w * zk[i];
                qd.diag[i - 1] = (1.0 - gamma) * qd.diag[i - 1] + gamma * w * zk[i] * zk[i];
            }
            x = block.solve(g, config_.epsilon);
        } else {
            SymMatrix& a = block.full();
            a.scale(1.0 - gamma);
            a.add_rank_one(gamma * w, zk);
            Matrix& inv = inverse_[k];
            const double grow = 1.0 / (1.0 - gamma);
            for (double& v : inv.values()) v *= grow;
            if (!sherman_morrison(inv, zk, gamma * w)) {
                inv = inverse_spd(a);
                ++refactorizations_;
            }
            x = inv.multiply(g);
        }
        auto out = delta.block(k);
        std::copy(x.begin(), x.end(), out.begin());
    }
    params.add_scaled(delta, eta);
    ++steps_;
}

std::size_t OnlineTrainer::default_init_size(const NetworkTopology& topology) {
    return 2 * (topology.max_fan_in() + 1);
}

}  // namespace invnet
