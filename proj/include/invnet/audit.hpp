#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invnet/optimizers.hpp"

namespace invnet {

enum class AuditStatus { pass, fail, expected_fail, unexpected_pass };

std::string_view to_string(AuditStatus status);

struct AuditEntry {
    std::string property;
    std::string optimizer;
    std::string network;
    double deviation = 0.0;
    double threshold = 0.0;
    AuditStatus status = AuditStatus::pass;
};

struct AuditConfig {
    std::uint64_t seed = 1;
    /// Step size of the single compared step.
    double eta = 0.5;
    std::size_t toy_networks = 5;
    std::size_t toy_samples = 24;
    /// Also audit the 100-30-10-30-100 auto-encoder.
    bool include_autoencoder = true;
    /// Enough samples for every auto-encoder block to be invertible without regularization.
    std::size_t autoencoder_samples = 64;
    std::size_t equalizer_instances = 10;
    std::size_t equalizer_competitors = 200;
    std::size_t best_fit_networks = 10;
    std::size_t mc_samples = 4;
};

/// Tolerances of the audit.
inline constexpr double kInvarianceTolerance = 1e-8;
inline constexpr double kSensitivityThreshold = 1e-3;
inline constexpr double kBestFitTolerance = 1e-8;
inline constexpr double kEqualizerMargin = 1e-6;

struct AuditReport {
    std::vector<AuditEntry> entries;

    /// An invariant that must hold failed, or an expected failure did not show.
    bool hard_failure() const;
    /// Worst entry per (property, optimizer), collapsed over networks.
    std::vector<AuditEntry> summary() const;
};

/// Affine reparametrization invariance: one step on a network and on a twin
/// with random (alpha, beta, gamma) charts at every input and hidden unit;
/// deviation is the largest output difference over the dataset.
AuditEntry audit_reparametrization(const Network& net, const ParameterSet& params, const Dataset& data,
                                   OptimizerKind kind, const AuditConfig& config, std::uint64_t seed,
                                   const std::string& label);

/// Affine recombination invariance: the twin feeds every unit of fan-in >= 2 an
/// invertible affine mix of its incoming activities.
AuditEntry audit_recombination(const Network& net, const ParameterSet& params, const Dataset& data,
                               OptimizerKind kind, const AuditConfig& config, std::uint64_t seed,
                               const std::string& label);

/// The step direction at every unit against an independent weighted least
/// squares fit (weights r^2 Phi, r^2 m or r^2 b^2; targets b / (r Phi) etc.).
/// Deviation is |W^{1/2} Z (delta - lambda)| / |W^{1/2} Z lambda|, the
/// distance in the metric of the fit, which does not depend on how
/// ill-conditioned the parametrization of the unit is.
AuditEntry audit_best_fit(const Network& net, const ParameterSet& params, const Dataset& data, OptimizerKind kind,
                          const std::string& label);

/// Variance of the per-sample first-order loss change along the full
/// outer-product direction versus random directions with the same average
/// change. Deviation is the smallest relative excess of a competitor.
AuditEntry audit_equalizer(const Network& net, const ParameterSet& params, const Dataset& data,
                           std::size_t competitors, std::uint64_t seed, const std::string& label);

AuditReport audit_invariance(const AuditConfig& config);

std::string format_report(const AuditReport& report);

}  // namespace invnet
