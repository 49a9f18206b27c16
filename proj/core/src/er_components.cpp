#include "demlab/er_components.hpp"

#include <cmath>
#include <stdexcept>

#include "demlab/clock.hpp"
#include "demlab/transform.hpp"

namespace demlab::er {

namespace {
std::uint64_t edge_key(std::int64_t n, std::int32_t u, std::int32_t v) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(v);
}
}  // namespace

ComponentState::ComponentState(std::int64_t n_, std::uint64_t seed)
    : n(n_), i(0), parent(n_), size(n_, 1), histogram(2, 0), components(n_), rng(seed) {
    if (n <= 0) throw std::invalid_argument("er: n must be positive");
    for (std::int32_t v = 0; v < n; ++v) parent[v] = v;
    histogram.assign(2, 0);
    histogram[1] = n;
}

std::int32_t ComponentState::find(std::int32_t v) {
    std::int32_t root = v;
    while (parent[root] != root) root = parent[root];
    while (parent[v] != root) {
        std::int32_t next = parent[v];
        parent[v] = root;
        v = next;
    }
    return root;
}

bool ComponentState::has_edge(std::int32_t u, std::int32_t v) const {
    return edge_keys.count(edge_key(n, u, v)) > 0;
}

void ComponentState::audit() {
    std::int64_t weighted = 0, comps = 0;
    for (std::size_t k = 1; k < histogram.size(); ++k) {
        weighted += static_cast<std::int64_t>(k) * histogram[k];
        comps += histogram[k];
    }
    if (weighted != n) throw std::runtime_error("er: vertex conservation violated");
    if (comps != components) throw std::runtime_error("er: component count out of sync");
    if (static_cast<std::int64_t>(edges.size()) != i)
        throw std::runtime_error("er: edge count out of sync");
}

ComponentState init(std::int64_t n, std::uint64_t seed) { return ComponentState(n, seed); }

bool step(ComponentState& state) {
    if (state.i >= state.max_edges())
        throw std::runtime_error("er: complete graph reached");
    auto un = static_cast<std::uint64_t>(state.n);
    std::int32_t u, v;
    // rejection sampling over vertex pairs keeps the choice exactly uniform
    // over missing edges
    do {
        u = static_cast<std::int32_t>(state.rng.next_below(un));
        v = static_cast<std::int32_t>(state.rng.next_below(un));
    } while (u == v || state.has_edge(u, v));
    if (u > v) std::swap(u, v);
    state.edges.emplace_back(u, v);
    state.edge_keys.insert(edge_key(state.n, u, v));
    ++state.i;

    std::int32_t ru = state.find(u), rv = state.find(v);
    if (ru == rv) return false;
    std::int32_t a = state.size[ru], b = state.size[rv];
    if (a < b) std::swap(ru, rv);
    state.parent[rv] = ru;
    state.size[ru] = a + b;
    if (static_cast<std::size_t>(a + b) >= state.histogram.size())
        state.histogram.resize(a + b + 1, 0);
    --state.histogram[a];
    --state.histogram[b];
    ++state.histogram[a + b];
    --state.components;
    return true;
}

double formula_drift(const ComponentState& state, int k) {
    if (k < 1) throw std::invalid_argument("formula_drift: k must be >= 1");
    double dn = static_cast<double>(state.n);
    double v = -2.0 * k * static_cast<double>(state.count(k)) / dn;
    for (int j = 1; j <= k - 1; ++j)
        v += static_cast<double>(j) * (k - j) * (static_cast<double>(state.count(j)) / dn) *
             (static_cast<double>(state.count(k - j)) / dn);
    return v;
}

double exact_drift_oracle(ComponentState& state, int k) {
    if (state.n > 30)
        throw std::invalid_argument("exact_drift_oracle: n must be <= 30");
    if (k < 1) throw std::invalid_argument("exact_drift_oracle: k must be >= 1");
    std::int64_t missing = 0, delta_sum = 0;
    for (std::int32_t u = 0; u < state.n; ++u) {
        for (std::int32_t v = u + 1; v < state.n; ++v) {
            if (state.has_edge(u, v)) continue;
            ++missing;
            std::int32_t ru = state.find(u), rv = state.find(v);
            if (ru == rv) continue;  // internal edge, no component change
            std::int64_t a = state.size[ru], b = state.size[rv];
            delta_sum += (a + b == k) - (a == k) - (b == k);
        }
    }
    if (missing == 0)
        throw std::invalid_argument("exact_drift_oracle: no missing edges");
    return static_cast<double>(delta_sum) / static_cast<double>(missing);
}

RunResult run(const RunParams& params) {
    const std::int64_t n = params.n;
    if (n <= 0 || params.c <= 0.0) throw std::invalid_argument("er::run: invalid parameters");
    const std::int64_t m = static_cast<std::int64_t>(std::floor(params.c * static_cast<double>(n)));
    const int kappa = params.kappa;
    if (kappa < 1 || kappa > 6)
        throw std::invalid_argument("er::run: kappa must be in [1, 6]");
    ComponentState state(n, params.seed);
    if (m > state.max_edges())
        throw std::invalid_argument("er::run: m exceeds the complete graph");

    const double dn = static_cast<double>(n);
    const double eps_base = std::pow(dn, -1.0 / 3.0);
    const double k3 = 6.0 * kappa * kappa * kappa;
    auto eval_eps = [&](double t) { return eps_base * std::exp(k3 * t); };

    // y_k(t) for k = 1..kappa; coeff_k = k^{k-2}/k!
    std::vector<double> coeff(kappa + 1, 0.0), yk(kappa + 1, 0.0);
    {
        double fact = 1.0;
        for (int k = 1; k <= kappa; ++k) {
            fact *= k;
            coeff[k] = std::pow(static_cast<double>(k), k - 2) / fact;
        }
    }
    auto eval_traj = [&](double t) {
        for (int k = 1; k <= kappa; ++k)
            yk[k] = (k == 1) ? std::exp(-2.0 * t)
                             : coeff[k] * std::pow(2.0 * t, k - 1) * std::exp(-2.0 * k * t);
    };

    RunResult result;
    result.traces.resize(kappa + 1);
    std::vector<RunningTransform> plus, minus;
    for (int k = 0; k <= kappa; ++k) {
        result.traces[k].var = "Y_" + std::to_string(k);
        plus.emplace_back(Sign::Plus, dn);
        minus.emplace_back(Sign::Minus, dn);
    }

    SimClock clock(n, m);
    bool good_so_far = true;
    DriftCheckSummary drift;

    for (std::int64_t i = 0; i <= m; ++i) {
        if (i > 0) {
            if (params.check_drift && good_so_far) {
                double t0 = clock.t_at(i - 1), t1 = clock.t_at(i);
                double e0 = eval_eps(t0), e1 = eval_eps(t1);
                eval_traj(t0);
                std::vector<double> y0 = yk;
                eval_traj(t1);
                for (int k = 1; k <= kappa; ++k) {
                    // envelope-adjusted upper bound on the drift, then the
                    // supermartingale combination with the exact trajectory step
                    double fd = formula_drift(state, k);
                    double bound = -2.0 * k * (y0[k] - e0);
                    for (int j = 1; j <= k - 1; ++j)
                        bound += j * (k - j) * (y0[j] + e0) * (y0[k - j] + e0);
                    double sup = bound - dn * ((yk[k] + e1) - (y0[k] + e0));
                    drift.checks += 2;
                    if (fd > bound) ++drift.failures;
                    if (sup > 0.0) ++drift.failures;
                    if (sup > drift.worst_margin) drift.worst_margin = sup;
                }
            }
            step(state);
            clock.advance();
        }

        double t = clock.t();
        double eps = eval_eps(t);
        eval_traj(t);

        bool record = (i % params.stride == 0) || i == m;
        bool violated_now = false;
        for (int k = 1; k <= kappa; ++k) {
            double value = static_cast<double>(state.count(k));
            plus[k].step(value, yk[k], eps, good_so_far, i);
            minus[k].step(value, yk[k], eps, good_so_far, i);
            double lo = dn * (yk[k] - eps), hi = dn * (yk[k] + eps);
            if (value < lo || value > hi) {
                violated_now = true;
                if (!result.violation)
                    result.violation = EnvelopeViolation{result.traces[k].var, i,
                                                         value > hi ? value - hi : value - lo};
            }
            double band = dn * eps;
            if (std::isfinite(band)) {
                double ratio = std::abs(value - dn * yk[k]) / band;
                if (ratio > result.max_dev_ratio) result.max_dev_ratio = ratio;
            }
            if (record)
                result.traces[k].rows.push_back({i, t, value, dn * yk[k], lo, hi});
        }
        if (violated_now) good_so_far = false;
    }

    // index 0 is unused for components; drop it from the output
    result.traces.erase(result.traces.begin());
    for (int k = 1; k <= kappa; ++k) {
        auto& tr = result.traces[k - 1];
        tr.final_value = static_cast<double>(state.count(k));
        tr.final_transform_plus = plus[k].current();
        tr.final_transform_minus = minus[k].current();
        if (plus[k].frozen()) tr.frozen_plus_at = plus[k].frozen_at();
        if (minus[k].frozen()) tr.frozen_minus_at = minus[k].frozen_at();
        result.finals[tr.var] = tr.final_value;
    }
    result.stats["components"] = static_cast<double>(state.components);
    result.drift = drift;
    state.audit();
    return result;
}

}  // namespace demlab::er
