#include "demlab/trajectories.hpp"

#include <cmath>

namespace demlab::traj {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

}  // namespace

double balls(int k, double t) {
    if (k < 0) throw std::domain_error("balls: k must be >= 0");
    if (t < 0.0) throw std::domain_error("balls: t must be >= 0");
    if (t == 0.0) return k == 0 ? 1.0 : 0.0;
    if (k > 20) return std::exp(k * std::log(t) - t - std::lgamma(k + 1.0));
    return std::pow(t, k) * std::exp(-t) / factorial(k);
}

double balls_deriv(int k, double t) {
    double prev = (k >= 1) ? balls(k - 1, t) : 0.0;
    return -balls(k, t) + prev;
}

double components(int k, double t) {
    if (k < 1) throw std::domain_error("components: k must be >= 1");
    if (t < 0.0) throw std::domain_error("components: t must be >= 0");
    if (k == 1) return std::exp(-2.0 * t);
    if (t == 0.0) return 0.0;
    if (k > 20)
        return std::exp((k - 2) * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0) +
                        (k - 1) * std::log(2.0 * t) - 2.0 * k * t);
    double coeff = std::pow(static_cast<double>(k), k - 2) / factorial(k);
    return coeff * std::pow(2.0 * t, k - 1) * std::exp(-2.0 * k * t);
}

double components_deriv(int k, double t) {
    // product rule on (k^{k-2}/k!) (2t)^{k-1} e^{-2kt}
    if (k == 1) return -2.0 * std::exp(-2.0 * t);
    if (t == 0.0) return k == 2 ? 1.0 : 0.0;  // y_2(t) = t e^{-4t}
    double y = components(k, t);
    return y * ((k - 1) / t - 2.0 * k);
}

double matching_p(double t) {
    if (t < 0.0 || t > 0.5) throw std::domain_error("matching_p: t must be in [0, 1/2]");
    return 1.0 - 2.0 * t;
}

double matching(int d, double t) { return d * matching_p(t); }

ErrorValue eval_error(const ErrorFunctionSpec& spec, double t) {
    switch (spec.variant) {
        case ErrorVariant::BbBasic: {
            if (t < 0.0) throw std::domain_error("eval_error: t must be >= 0");
            double n13 = std::pow(static_cast<double>(spec.n), -1.0 / 3.0);
            return {n13 * std::exp(3.0 * t), std::nullopt};
        }
        case ErrorVariant::BbSelfCorrect: {
            if (t < 0.0) throw std::domain_error("eval_error: t must be >= 0");
            double base = std::pow(static_cast<double>(spec.n), -0.5 + spec.alpha / 2.0);
            return {base * (1.0 + t), base * (0.5 + t)};
        }
        case ErrorVariant::Components: {
            if (t < 0.0) throw std::domain_error("eval_error: t must be >= 0");
            double n13 = std::pow(static_cast<double>(spec.n), -1.0 / 3.0);
            double k3 = static_cast<double>(spec.kappa) * spec.kappa * spec.kappa;
            return {n13 * std::exp(6.0 * k3 * t), std::nullopt};
        }
        case ErrorVariant::Matching: {
            double p = matching_p(t);
            if (p <= 0.0) throw std::domain_error("eval_error: matching variant needs p(t) > 0");
            double p2 = p * p;
            return {spec.s / (p2 * p2), std::nullopt};
        }
    }
    throw std::invalid_argument("eval_error: unknown variant");
}

Envelope make_envelope(const ErrorFunctionSpec& spec) {
    Envelope env;
    env.scale = (spec.variant == ErrorVariant::Matching) ? 1.0 : static_cast<double>(spec.n);
    env.epsilon = [spec](double t) { return eval_error(spec, t).epsilon; };
    if (spec.variant == ErrorVariant::BbSelfCorrect)
        env.delta = [spec](double t) { return *eval_error(spec, t).delta; };
    return env;
}

OdeSystem balls_system(int K) {
    OdeSystem sys;
    sys.dimension = K + 1;
    sys.initial.assign(K + 1, 0.0);
    sys.initial[0] = 1.0;
    sys.rhs = [K](double, const std::vector<double>& x, std::vector<double>& out) {
        for (int k = 0; k <= K; ++k)
            out[k] = -x[k] + (k >= 1 ? x[k - 1] : 0.0);
    };
    return sys;
}

OdeSystem components_system(int K) {
    // state index j holds y_{j+1}
    OdeSystem sys;
    sys.dimension = K;
    sys.initial.assign(K, 0.0);
    sys.initial[0] = 1.0;
    sys.rhs = [K](double, const std::vector<double>& y, std::vector<double>& out) {
        for (int k = 1; k <= K; ++k) {
            double v = -2.0 * k * y[k - 1];
            for (int j = 1; j <= k - 1; ++j)
                v += j * (k - j) * y[j - 1] * y[k - j - 1];
            out[k - 1] = v;
        }
    };
    return sys;
}

std::vector<std::vector<double>> integrate_rk4(const OdeSystem& system, double t_end, double h) {
    if (h <= 0.0) throw std::invalid_argument("integrate_rk4: h must be positive");
    if (t_end < 0.0) throw std::invalid_argument("integrate_rk4: t_end must be >= 0");
    const int dim = system.dimension;
    std::vector<double> y = system.initial;
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    auto steps = static_cast<std::int64_t>(t_end / h + 0.5);
    std::vector<std::vector<double>> samples;
    samples.reserve(steps + 1);
    samples.push_back(y);
    for (std::int64_t s = 0; s < steps; ++s) {
        double t = s * h;
        system.rhs(t, y, k1);
        for (int j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        system.rhs(t + 0.5 * h, tmp, k2);
        for (int j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        system.rhs(t + 0.5 * h, tmp, k3);
        for (int j = 0; j < dim; ++j) tmp[j] = y[j] + h * k3[j];
        system.rhs(t + h, tmp, k4);
        for (int j = 0; j < dim; ++j) {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if (!std::isfinite(y[j]))
                throw std::runtime_error("integrate_rk4: non-finite state");
        }
        samples.push_back(y);
    }
    return samples;
}

TreeIdentity verify_tree_identity(int k) {
    if (k < 1 || k > 20)
        throw std::invalid_argument("verify_tree_identity: k must be in [1, 20]");
    auto ipow = [](unsigned __int128 base, int e) {
        unsigned __int128 r = 1;
        for (int i = 0; i < e; ++i) r *= base;
        return r;
    };
    // binomials via Pascal's triangle, exact in 128 bits for k <= 20
    std::vector<std::vector<unsigned __int128>> binom(k + 1);
    for (int i = 0; i <= k; ++i) {
        binom[i].assign(i + 1, 1);
        for (int j = 1; j < i; ++j) binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
    }
    unsigned __int128 lhs = 0;
    for (int j = 1; j <= k - 1; ++j)
        lhs += binom[k][j] * ipow(j, j - 1) * ipow(k - j, k - j - 1);
    unsigned __int128 rhs = (k >= 2) ? 2 * static_cast<unsigned __int128>(k - 1) * ipow(k, k - 2) : 0;
    return {lhs, rhs};
}

std::string u128_to_string(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

double taylor_residual(const std::function<double(double)>& f,
                       const std::function<double(double)>& f_prime, double t, std::int64_t n) {
    double dn = static_cast<double>(n);
    return std::abs(dn * (f(t + 1.0 / dn) - f(t)) - f_prime(t));
}

}  // namespace demlab::traj
