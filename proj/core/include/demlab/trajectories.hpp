#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demlab/envelope.hpp"

namespace demlab::traj {

// Occupancy trajectory x_k(t) = t^k e^{-t} / k!.
double balls(int k, double t);
// Analytic derivative x_k'(t) = -x_k + x_{k-1}.
double balls_deriv(int k, double t);

// Component trajectory y_k(t) = (k^{k-2}/k!) (2t)^{k-1} e^{-2kt}, k >= 1.
double components(int k, double t);
double components_deriv(int k, double t);

// Unmatched-degree trajectory d*p(t) with p(t) = 1 - 2t, for 0 <= t <= 1/2.
double matching_p(double t);
double matching(int d, double t);

// ---------------------------------------------------------------------------
// Error functions

enum class ErrorVariant { BbBasic, BbSelfCorrect, Components, Matching };

struct ErrorFunctionSpec {
    ErrorVariant variant;
    std::int64_t n = 0;
    double alpha = 0.1;  // bb-selfcorrect
    int kappa = 4;       // components
    double s = 0.0;      // matching
    int d = 0;           // matching
};

struct ErrorValue {
    double epsilon;
    std::optional<double> delta;
};

ErrorValue eval_error(const ErrorFunctionSpec& spec, double t);

// Envelope with scale n (or 1 for the matching variant, whose band applies
// to a single degree rather than a count of n objects).
Envelope make_envelope(const ErrorFunctionSpec& spec);

// ---------------------------------------------------------------------------
// ODE systems and RK4

struct OdeSystem {
    int dimension;
    std::function<void(double, const std::vector<double>&, std::vector<double>&)> rhs;
    std::vector<double> initial;
};

// x_k' = -x_k + x_{k-1}, x_{-1} = 0, dimension K+1, indices 0..K.
OdeSystem balls_system(int K);
// y_k' = -2k y_k + sum_{j=1}^{k-1} j(k-j) y_j y_{k-j}, dimension K, indices 1..K.
OdeSystem components_system(int K);

// Classical fixed-step RK4. Returns the state at every multiple of h from 0
// to t_end (t_end rounded down to a multiple of h).
std::vector<std::vector<double>> integrate_rk4(const OdeSystem& system, double t_end, double h);

// ---------------------------------------------------------------------------
// Combinatorial identity and Taylor residual

struct TreeIdentity {
    unsigned __int128 lhs;  // sum_{j=1}^{k-1} C(k,j) j^{j-1} (k-j)^{k-j-1}
    unsigned __int128 rhs;  // 2(k-1) k^{k-2}
    bool equal() const { return lhs == rhs; }
};

TreeIdentity verify_tree_identity(int k);
std::string u128_to_string(unsigned __int128 v);

// |n(f(t + 1/n) - f(t)) - f'(t)|
double taylor_residual(const std::function<double(double)>& f,
                       const std::function<double(double)>& f_prime, double t, std::int64_t n);

}  // namespace demlab::traj
