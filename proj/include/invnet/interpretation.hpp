#pragma once

#include <random>
#include <span>
#include <vector>

#include "invnet/network.hpp"

namespace invnet {

/// Saturation guard for Bernoulli (u clamped to [g, 1-g]) and spherical (|u| >= g).
inline constexpr double kOutputClamp = 1e-12;

/// Fisher metric of the output distribution with respect to the decoded
/// outputs u, always of the form diag(d) - v v^T (v empty when zero).
struct OutputFisher {
    std::vector<double> diag;
    std::vector<double> coupling;

    double entry(std::size_t k, std::size_t l) const {
        double f = k == l ? diag[k] : 0.0;
        if (!coupling.empty()) f -= coupling[k] * coupling[l];
        return f;
    }
};

/// Output activities after decoding and clamping for the interpretation.
std::vector<double> decode_outputs(const Network& net, std::span<const double> activities);

/// Throws std::domain_error unless the target is valid for the interpretation:
/// binary vector (Bernoulli), finite reals (square loss), one-hot (softmax, spherical).
void validate_target(Interpretation kind, std::span<const double> target, std::size_t output_count);

/// -ln omega(y) in nats, from decoded outputs.
double interpretation_loss(Interpretation kind, std::span<const double> u, std::span<const double> target);

/// -d loss / d u for each output.
void interpretation_backprop(Interpretation kind, std::span<const double> u, std::span<const double> target,
                             std::span<double> out);

OutputFisher interpretation_fisher(Interpretation kind, std::span<const double> u);

/// Class probabilities for softmax / spherical.
std::vector<double> class_probabilities(Interpretation kind, std::span<const double> u);

/// Draws y ~ omega(. | u) into `target`.
void sample_target(Interpretation kind, std::span<const double> u, std::mt19937_64& rng, std::span<double> target);

std::vector<double> one_hot(std::size_t size, std::size_t index);

}  // namespace invnet
