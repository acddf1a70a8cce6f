#pragma once

// Reference implementations used only by tests. They share no code with the
// library's sweeps: a naive recursive forward pass over the topology, written
// for any scalar type, differentiated with forward-mode dual numbers, and
// expectations over outputs taken by exhaustive enumeration.

#include <cmath>
#include <functional>
#include <optional>
#include <numbers>
#include <random>
#include <vector>

#include "invnet/experiment.hpp"
#include "invnet/kernels.hpp"
#include "invnet/interpretation.hpp"
#include "invnet/network.hpp"

namespace oracle {

using namespace invnet;

struct Dual {
    double v = 0.0;
    double d = 0.0;
    Dual() = default;
    Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline Dual exp(Dual a) { return {std::exp(a.v), std::exp(a.v) * a.d}; }
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual tanh(Dual a) {
    const double t = std::tanh(a.v);
    return {t, (1.0 - t * t) * a.d};
}
inline double value(double x) { return x; }
inline double value(Dual x) { return x.v; }
using std::exp;
using std::log;
using std::tanh;

/// Activity of unit k by direct recursion over incoming edges (memoized).
template <class T>
T activity(const Network& net, const std::vector<T>& theta, const ParameterSet& layout,
           std::span<const double> input, UnitId k, std::vector<std::optional<T>>& memo) {
    if (memo[k]) return *memo[k];
    const auto& topo = net.topology();
    T a;
    if (k == kBiasUnit) {
        a = T(1.0);
    } else if (topo.is_input(k)) {
        a = T(input[topo.input_index(k)]);
    } else {
        const auto in = topo.incoming(k);
        const std::size_t off = layout.offset(k);
        T y = theta[off];
        for (std::size_t s = 0; s < in.size(); ++s)
            y = y + theta[off + s + 1] * activity(net, theta, layout, input, in[s], memo);
        if (net.activation() == ActivationKind::sigmoid)
            a = T(1.0) / (T(1.0) + exp(-y));
        else
            a = tanh(y);
    }
    memo[k] = a;
    return a;
}

/// Decoded outputs u (no clamping).
template <class T>
std::vector<T> outputs(const Network& net, const std::vector<T>& theta, std::span<const double> input) {
    const ParameterSet layout(net.topology());
    std::vector<std::optional<T>> memo(net.topology().unit_count());
    std::vector<T> u;
    for (UnitId o : net.topology().outputs()) {
        const T a = activity(net, theta, layout, input, o, memo);
        u.push_back(net.activation() == ActivationKind::tanh ? T(0.5) + T(0.5) * a : a);
    }
    return u;
}

template <class T>
T loss(Interpretation kind, const std::vector<T>& u, std::span<const double> y) {
    T l(0.0);
    switch (kind) {
        case Interpretation::square_loss:
            for (std::size_t i = 0; i < u.size(); ++i) l = l + T(0.5) * (T(y[i]) - u[i]) * (T(y[i]) - u[i]);
            return l + T(0.5 * static_cast<double>(u.size()) * std::log(2.0 * std::numbers::pi));
        case Interpretation::bernoulli:
            for (std::size_t i = 0; i < u.size(); ++i) l = l - (y[i] == 1.0 ? log(u[i]) : log(T(1.0) - u[i]));
            return l;
        case Interpretation::softmax: {
            T s(0.0);
            T hot(0.0);
            for (std::size_t i = 0; i < u.size(); ++i) {
                s = s + exp(u[i]);
                if (y[i] == 1.0) hot = u[i];
            }
            return log(s) - hot;
        }
        case Interpretation::spherical: {
            T s(0.0);
            T hot(0.0);
            for (std::size_t i = 0; i < u.size(); ++i) {
                s = s + u[i] * u[i];
                if (y[i] == 1.0) hot = u[i];
            }
            return log(s) - log(hot * hot);
        }
    }
    return l;
}

inline std::vector<double> flat(const ParameterSet& p) { return {p.values().begin(), p.values().end()}; }

/// d loss / d theta for one sample, one dual pass per parameter.
inline std::vector<double> loss_gradient(const Network& net, const ParameterSet& params, std::span<const double> x,
                                         std::span<const double> y) {
    const auto base = flat(params);
    std::vector<double> g(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<Dual> theta(base.begin(), base.end());
        theta[i].d = 1.0;
        g[i] = loss(net.interpretation(), outputs(net, theta, x), y).d;
    }
    return g;
}

/// d u / d theta, outputs x parameters.
inline std::vector<std::vector<double>> output_jacobian(const Network& net, const ParameterSet& params,
                                                        std::span<const double> x) {
    const auto base = flat(params);
    const std::size_t n_out = net.topology().outputs().size();
    std::vector<std::vector<double>> j(n_out, std::vector<double>(base.size()));
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<Dual> theta(base.begin(), base.end());
        theta[i].d = 1.0;
        const auto u = outputs(net, theta, x);
        for (std::size_t o = 0; o < n_out; ++o) j[o][i] = u[o].d;
    }
    return j;
}

/// Every outcome y of the output distribution with its probability.
inline std::vector<std::pair<std::vector<double>, double>> outcomes(Interpretation kind, const std::vector<double>& u) {
    std::vector<std::pair<std::vector<double>, double>> out;
    const std::size_t n = u.size();
    if (kind == Interpretation::bernoulli) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<double> y(n);
            double p = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = (mask >> i) & 1U ? 1.0 : 0.0;
                p *= y[i] == 1.0 ? u[i] : 1.0 - u[i];
            }
            out.emplace_back(std::move(y), p);
        }
    } else if (kind == Interpretation::softmax || kind == Interpretation::spherical) {
        double z = 0.0;
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) z += w[i] = kind == Interpretation::softmax ? std::exp(u[i]) : u[i] * u[i];
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> y(n, 0.0);
            y[i] = 1.0;
            out.emplace_back(std::move(y), w[i] / z);
        }
    }
    return out;
}

/// Full Fisher matrix by enumeration of outcomes (Bernoulli, softmax,
/// spherical) or, for square loss, J^T J with J the output Jacobian.
inline Matrix full_fisher(const Network& net, const ParameterSet& params, const Dataset& data) {
    const std::size_t n = params.size();
    Matrix f(n, n);
    for (const Sample& s : data) {
        if (net.interpretation() == Interpretation::square_loss) {
            const auto j = output_jacobian(net, params, s.input);
            for (const auto& row : j)
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) f(a, b) += row[a] * row[b];
            continue;
        }
        const auto u = outputs(net, flat(params), s.input);
        for (const auto& [y, p] : outcomes(net.interpretation(), u)) {
            const auto g = loss_gradient(net, params, s.input, y);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) f(a, b) += p * g[a] * g[b];
        }
    }
    for (double& v : f.values()) v /= static_cast<double>(data.size());
    return f;
}

/// E_y[(d loss / d u)(d loss / d u)^T] by enumeration, for the output Fisher metric.
inline Matrix output_fisher(Interpretation kind, const std::vector<double>& u) {
    const std::size_t n = u.size();
    Matrix f(n, n);
    for (const auto& [y, p] : outcomes(kind, u)) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Dual> ud(u.begin(), u.end());
            ud[i].d = 1.0;
            g[i] = loss(kind, ud, y).d;
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) f(a, b) += p * g[a] * g[b];
    }
    return f;
}

/// Centered finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t i, double h) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

/// Random valid dataset with Gaussian inputs.
inline Dataset random_dataset(const NetworkTopology& topo, Interpretation kind, std::uint64_t seed,
                              std::size_t samples) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data(samples);
    const std::size_t n_out = topo.outputs().size();
    for (Sample& s : data) {
        s.input.resize(topo.inputs().size());
        for (double& x : s.input) x = normal(rng);
        s.target.assign(n_out, 0.0);
        if (kind == Interpretation::square_loss)
            for (double& y : s.target) y = normal(rng);
        else if (kind == Interpretation::bernoulli)
            for (double& y : s.target) y = static_cast<double>(rng() & 1U);
        else
            s.target[rng() % n_out] = 1.0;
    }
    return data;
}

inline Network random_network(std::uint64_t seed, std::span<const std::size_t> sizes, ActivationKind act,
                              Interpretation kind, double density = 0.7, double skip = 0.3) {
    return Network(generate_layered(seed, sizes, density, skip), act, kind);
}

inline Network network(std::uint64_t seed, std::initializer_list<std::size_t> sizes, ActivationKind act,
                       Interpretation kind, double density = 0.7, double skip = 0.3) {
    const std::vector<std::size_t> v(sizes);
    return random_network(seed, v, act, kind, density, skip);
}

/// Entries of a metric block as one flat vector (packed full block, or qd entries).
inline std::vector<double> flat_block(const UnitMetricBlock& b) {
    if (!b.is_quasi_diagonal()) {
        const auto p = b.full().packed();
        return {p.begin(), p.end()};
    }
    std::vector<double> out{b.qd().a00};
    out.insert(out.end(), b.qd().a0.begin(), b.qd().a0.end());
    out.insert(out.end(), b.qd().diag.begin(), b.qd().diag.end());
    return out;
}

/// Euclidean distance between the entries of two blocks of the same shape.
inline double block_distance(const UnitMetricBlock& a, const UnitMetricBlock& b) {
    const auto x = flat_block(a);
    const auto y = flat_block(b);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}

}  // namespace oracle
