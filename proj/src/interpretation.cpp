#include "invnet/interpretation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace invnet {

namespace {

double clamp_bernoulli(double u) { return std::clamp(u, kOutputClamp, 1.0 - kOutputClamp); }

double clamp_spherical(double u) {
    if (std::abs(u) >= kOutputClamp) return u;
    return u < 0.0 ? -kOutputClamp : kOutputClamp;
}

std::size_t hot_index(std::span<const double> target) {
    for (std::size_t i = 0; i < target.size(); ++i)
        if (target[i] == 1.0) return i;
    return target.size();
}

}  // namespace

std::vector<double> decode_outputs(const Network& net, std::span<const double> activities) {
    const auto outs = net.topology().outputs();
    std::vector<double> u(outs.size());
    const double slope = net.output_slope();
    const double offset = net.output_offset();
    for (std::size_t o = 0; o < outs.size(); ++o) {
        double v = offset + slope * activities[outs[o]];
        if (net.interpretation() == Interpretation::bernoulli) v = clamp_bernoulli(v);
        if (net.interpretation() == Interpretation::spherical) v = clamp_spherical(v);
        u[o] = v;
    }
    return u;
}

void validate_target(Interpretation kind, std::span<const double> target, std::size_t output_count) {
    if (target.size() != output_count)
        throw std::domain_error("target length " + std::to_string(target.size()) + " differs from output layer size " +
                                std::to_string(output_count));
    switch (kind) {
        case Interpretation::square_loss:
            for (double y : target)
                if (!std::isfinite(y)) throw std::domain_error("square-loss target must be finite");
            return;
        case Interpretation::bernoulli:
            for (double y : target)
                if (y != 0.0 && y != 1.0) throw std::domain_error("Bernoulli target must be binary");
            return;
        case Interpretation::softmax:
        case Interpretation::spherical: {
            std::size_t ones = 0;
            for (double y : target) {
                if (y != 0.0 && y != 1.0) throw std::domain_error("class target must be one-hot");
                ones += y == 1.0;
            }
            if (ones != 1) throw std::domain_error("class target must be one-hot");
            return;
        }
    }
}

std::vector<double> class_probabilities(Interpretation kind, std::span<const double> u) {
    std::vector<double> p(u.size());
    if (kind == Interpretation::softmax) {
        const double m = *std::max_element(u.begin(), u.end());
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += p[i] = std::exp(u[i] - m);
        for (double& v : p) v /= s;
    } else if (kind == Interpretation::spherical) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += p[i] = u[i] * u[i];
        for (double& v : p) v /= s;
    } else {
        throw std::invalid_argument("class_probabilities: not a classification interpretation");
    }
    return p;
}

double interpretation_loss(Interpretation kind, std::span<const double> u, std::span<const double> target) {
    validate_target(kind, target, u.size());
    switch (kind) {
        case Interpretation::square_loss: {
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) s += 0.5 * (target[i] - u[i]) * (target[i] - u[i]);
            return s + 0.5 * static_cast<double>(u.size()) * std::log(2.0 * std::numbers::pi);
        }
        case Interpretation::bernoulli: {
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) s -= target[i] == 1.0 ? std::log(u[i]) : std::log1p(-u[i]);
            return s;
        }
        case Interpretation::softmax: {
            const double m = *std::max_element(u.begin(), u.end());
            double s = 0.0;
            for (double v : u) s += std::exp(v - m);
            return m + std::log(s) - u[hot_index(target)];
        }
        case Interpretation::spherical: {
            double s = 0.0;
            for (double v : u) s += v * v;
            const double uc = u[hot_index(target)];
            return std::log(s) - std::log(uc * uc);
        }
    }
    return 0.0;
}

void interpretation_backprop(Interpretation kind, std::span<const double> u, std::span<const double> target,
                             std::span<double> out) {
    validate_target(kind, target, u.size());
    switch (kind) {
        case Interpretation::square_loss:
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = target[i] - u[i];
            return;
        case Interpretation::bernoulli:
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = (target[i] - u[i]) / (u[i] * (1.0 - u[i]));
            return;
        case Interpretation::softmax: {
            const auto p = class_probabilities(kind, u);
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = target[i] - p[i];
            return;
        }
        case Interpretation::spherical: {
            double s = 0.0;
            for (double v : u) s += v * v;
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = 2.0 * target[i] / u[i] - 2.0 * u[i] / s;
            return;
        }
    }
}

OutputFisher interpretation_fisher(Interpretation kind, std::span<const double> u) {
    OutputFisher f;
    f.diag.resize(u.size());
    switch (kind) {
        case Interpretation::square_loss:
            std::fill(f.diag.begin(), f.diag.end(), 1.0);
            break;
        case Interpretation::bernoulli:
            for (std::size_t i = 0; i < u.size(); ++i) f.diag[i] = 1.0 / (u[i] * (1.0 - u[i]));
            break;
        case Interpretation::softmax:
            f.diag = class_probabilities(kind, u);
            f.coupling = f.diag;
            break;
        case Interpretation::spherical: {
            f.coupling.assign(u.size(), 0.0);
            // a single class is certain; 4/s - (2u/s)^2 cancels badly for tiny u
            if (u.size() == 1) {
                f.diag[0] = 0.0;
                break;
            }
            double s = 0.0;
            for (double v : u) s += v * v;
            std::fill(f.diag.begin(), f.diag.end(), 4.0 / s);
            for (std::size_t i = 0; i < u.size(); ++i) f.coupling[i] = 2.0 * u[i] / s;
            break;
        }
    }
    return f;
}

void sample_target(Interpretation kind, std::span<const double> u, std::mt19937_64& rng, std::span<double> target) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    switch (kind) {
        case Interpretation::square_loss: {
            std::normal_distribution<double> noise(0.0, 1.0);
            for (std::size_t i = 0; i < u.size(); ++i) target[i] = u[i] + noise(rng);
            return;
        }
        case Interpretation::bernoulli:
            for (std::size_t i = 0; i < u.size(); ++i) target[i] = uniform(rng) < u[i] ? 1.0 : 0.0;
            return;
        case Interpretation::softmax:
        case Interpretation::spherical: {
            const auto p = class_probabilities(kind, u);
            const double draw = uniform(rng);
            double acc = 0.0;
            std::size_t chosen = p.size() - 1;
            for (std::size_t i = 0; i < p.size(); ++i) {
                acc += p[i];
                if (draw < acc) {
                    chosen = i;
                    break;
                }
            }
            std::fill(target.begin(), target.end(), 0.0);
            target[chosen] = 1.0;
            return;
        }
    }
}

std::vector<double> one_hot(std::size_t size, std::size_t index) {
    if (index >= size) throw std::invalid_argument("one_hot: index out of range");
    std::vector<double> v(size, 0.0);
    v[index] = 1.0;
    return v;
}

}  // namespace invnet
