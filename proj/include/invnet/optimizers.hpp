#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "invnet/kernels.hpp"

namespace invnet {

enum class OptimizerKind {
    backprop,
    unitwise_natural,
    qd_natural,
    backpropagated_metric,
    qd_backpropagated_metric,
    unitwise_op,
    mc_unitwise_natural,
    mc_qd_natural,
    diagonal_gauss_newton,
    adagrad,
};

inline constexpr OptimizerKind kAllOptimizers[] = {
    OptimizerKind::backprop,           OptimizerKind::unitwise_natural,
    OptimizerKind::qd_natural,         OptimizerKind::backpropagated_metric,
    OptimizerKind::qd_backpropagated_metric, OptimizerKind::unitwise_op,
    OptimizerKind::mc_unitwise_natural, OptimizerKind::mc_qd_natural,
    OptimizerKind::diagonal_gauss_newton, OptimizerKind::adagrad,
};

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

/// Metric builder and block shape behind each kind (MetricKind::none for backprop).
MetricKind metric_of(OptimizerKind kind);
BlockShape shape_of(OptimizerKind kind);

/// AdaGrad divides by (RMS + kAdagradGuard).
inline constexpr double kAdagradGuard = 1e-12;

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::backprop;
    double lr0 = 0.01;
    double epsilon = 1e-4;
    double gamma = 0.01;
    std::size_t mc_samples = 1;
    std::uint64_t seed = 0;

    bool operator==(const OptimizerConfig&) const = default;
};

std::string config_to_json(const OptimizerConfig& config);
OptimizerConfig config_from_json(std::string_view text);

/// Update direction at `params` (the step is params + eta * delta) and the
/// mean loss there, in nats. `stream` selects the Monte Carlo draws.
struct Direction {
    ParameterSet delta;
    double loss = 0.0;
};

Direction compute_direction(const Network& net, const ParameterSet& params, const Dataset& data,
                            const OptimizerConfig& config, std::uint64_t stream = 0,
                            Execution execution = Execution::parallel);

/// params + eta * direction for the given kind.
ParameterSet optimizer_step(const Network& net, const ParameterSet& params, const Dataset& data,
                            const OptimizerConfig& config, double eta, std::uint64_t stream = 0,
                            Execution execution = Execution::parallel);

ParameterSet step_backprop(const Network& net, const ParameterSet& params, const Dataset& data, double eta);
ParameterSet step_unitwise_natural(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                                   double epsilon);
ParameterSet step_qd_natural(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                             double epsilon);
ParameterSet step_backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                        double eta, double epsilon);
ParameterSet step_qd_backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                           double eta, double epsilon);
ParameterSet step_unitwise_op(const Network& net, const ParameterSet& params, const Dataset& data, double eta,
                              double epsilon);
ParameterSet step_diagonal_gauss_newton(const Network& net, const ParameterSet& params, const Dataset& data,
                                        double eta, double epsilon);
ParameterSet step_adagrad(const Network& net, const ParameterSet& params, const Dataset& data, double eta);

/// Multiplies eta by 1.1 on acceptance, halves it on rejection.
class LearningRateController {
public:
    static constexpr double kGrowth = 1.1;
    static constexpr double kShrink = 0.5;

    explicit LearningRateController(double eta0 = 0.01);

    double eta() const { return eta_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }

    void accept();
    void reject();

private:
    double eta_;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

struct EpochResult {
    bool accepted = false;
    /// Step size tried in this epoch.
    double eta = 0.0;
    /// Mean loss (nats) at the parameters kept after the decision.
    double loss = 0.0;
};

/// One batch epoch: candidate = params + eta * direction, kept iff its mean
/// loss is strictly lower. Rebuilds the metric from `params`.
EpochResult adaptive_epoch(const Network& net, ParameterSet& params, const Dataset& data,
                           const OptimizerConfig& config, LearningRateController& controller,
                           std::uint64_t stream = 0, Execution execution = Execution::parallel);

/// Repeated adaptive epochs. The direction is rebuilt only after an accepted
/// step; rejected epochs retry the cached direction with the halved rate.
class BatchTrainer {
public:
    BatchTrainer(const Network& net, const Dataset& data, OptimizerConfig config,
                 Execution execution = Execution::parallel);

    EpochResult epoch(ParameterSet& params);

    const LearningRateController& controller() const { return controller_; }
    /// Number of directions built so far; also the Monte Carlo stream of the next one.
    std::uint64_t directions_built() const { return directions_; }

private:
    const Network& net_;
    const Dataset& data_;
    OptimizerConfig config_;
    Execution execution_;
    LearningRateController controller_;
    std::optional<Direction> cached_;
    std::uint64_t directions_ = 0;
};

/// Streaming metric estimate A^(t) = (1 - gamma) A^(t-1) + gamma A(x_t) per unit,
/// with the inverse of full blocks tracked by rank-one updates.
class OnlineTrainer {
public:
    /// Kind must be one of the metric-based natural/OP variants. A^(0) is the
    /// average of A(x) over `init` plus epsilon Id (full blocks) or with
    /// epsilon added at solve time (quasi-diagonal blocks).
    OnlineTrainer(const Network& net, const ParameterSet& params, const Dataset& init, OptimizerConfig config);

    /// Discounted metric update from `sample`, then params += eta * A^{-1} G(sample).
    void step(ParameterSet& params, const Sample& sample, double eta);

    std::size_t steps() const { return steps_; }
    std::size_t refactorizations() const { return refactorizations_; }
    const UnitMetricBlock& metric(UnitId k) const { return metric_[k]; }
    /// Tracked inverse of a full block (empty matrix for qd blocks).
    const Matrix& inverse(UnitId k) const { return inverse_[k]; }

    /// Default n_init: twice the largest block size.
    static std::size_t default_init_size(const NetworkTopology& topology);

private:
    const Network& net_;
    OptimizerConfig config_;
    std::vector<UnitMetricBlock> metric_;
    std::vector<Matrix> inverse_;
    std::size_t steps_ = 0;
    std::size_t refactorizations_ = 0;
};

}  // namespace invnet
