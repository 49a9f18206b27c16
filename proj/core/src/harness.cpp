#include "demlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "demlab/trajectories.hpp"

namespace demlab::harness {

namespace {

std::int64_t effective_steps(const ExperimentConfig& cfg) {
    switch (cfg.process) {
        case Process::BallsBins:
            return cfg.m;
        case Process::ErComponents:
            return static_cast<std::int64_t>(std::floor(cfg.c * static_cast<double>(cfg.n)));
        case Process::Matching:
            return cfg.n / 2;
    }
    return 0;
}

std::int64_t effective_stride(const ExperimentConfig& cfg) {
    if (cfg.stride > 0) return cfg.stride;
    return std::max<std::int64_t>(1, effective_steps(cfg) / 2000);
}

RunResult run_one(const ExperimentConfig& cfg, std::uint64_t seed, std::int64_t stride,
                  const gm::RegularGraph* shared_graph) {
    switch (cfg.process) {
        case Process::BallsBins: {
            bb::RunParams p;
            p.n = cfg.n;
            p.m = cfg.m;
            p.kappa = cfg.kappa;
            p.variant = cfg.bb_variant;
            p.alpha = cfg.alpha;
            p.seed = seed;
            p.stride = stride;
            return bb::run(p);
        }
        case Process::ErComponents: {
            er::RunParams p;
            p.n = cfg.n;
            p.c = cfg.c;
            p.kappa = cfg.kappa;
            p.seed = seed;
            p.stride = stride;
            return er::run(p);
        }
        case Process::Matching: {
            gm::RunParams p;
            p.K = cfg.K;
            p.seed = seed;
            p.stride = stride;
            if (shared_graph) return gm::match_run(*shared_graph, p);
            auto graph = gm::gen_pairing(cfg.n, cfg.d, derive_seed(seed, 1));
            return gm::match_run(graph, p);
        }
    }
    throw std::invalid_argument("run_one: unknown process");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

EnsembleReport run_ensemble(const ExperimentConfig& cfg) {
    if (cfg.replicas < 1) throw std::invalid_argument("run_ensemble: replicas must be >= 1");
    auto t_start = std::chrono::steady_clock::now();
    const std::int64_t stride = effective_stride(cfg);

    // shared read-only graph for the deterministic generator
    std::optional<gm::RegularGraph> shared_graph;
    if (cfg.process == Process::Matching) {
        if (!cfg.graph_file.empty())
            shared_graph = gm::read_graph(cfg.graph_file);
        else if (cfg.generator == "circulant")
            shared_graph = gm::gen_circulant(cfg.n, cfg.d);
        else if (cfg.generator != "pairing")
            throw std::invalid_argument("run_ensemble: unknown generator " + cfg.generator);
    }

    // Validate parameters up front so a bad config aborts before any work.
    switch (cfg.process) {
        case Process::BallsBins:
            if (cfg.n <= 0 || cfg.m < 0 || cfg.kappa < 0)
                throw std::invalid_argument("run_ensemble: invalid balls-bins parameters");
            if (cfg.m > bb::horizon_limit(cfg.n, cfg.bb_variant, cfg.alpha))
                throw std::invalid_argument("run_ensemble: m exceeds the envelope horizon");
            break;
        case Process::ErComponents:
            if (cfg.n <= 0 || cfg.c <= 0.0 || cfg.kappa < 1 || cfg.kappa > 6)
                throw std::invalid_argument("run_ensemble: invalid er-components parameters");
            if (effective_steps(cfg) > cfg.n * (cfg.n - 1) / 2)
                throw std::invalid_argument("run_ensemble: m exceeds the complete graph");
            break;
        case Process::Matching:
            if (cfg.K <= 0.0) throw std::invalid_argument("run_ensemble: K must be positive");
            if (!shared_graph && ((cfg.n * cfg.d) % 2 != 0 || cfg.d <= 0 || cfg.d >= cfg.n))
                throw std::invalid_argument("run_ensemble: infeasible (n, d)");
            break;
    }

    EnsembleReport report;
    report.config = cfg;
    report.replicas.resize(cfg.replicas);
    std::vector<MartingaleTrace> traces0;

    std::atomic<int> next{0};
    std::mutex traces_mutex;
    std::atomic<bool> config_error{false};
    std::string config_error_msg;
    auto worker = [&]() {
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= cfg.replicas) return;
            ReplicaOutcome out;
            out.index = r;
            out.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(r));
            try {
                RunResult res =
                    run_one(cfg, out.seed, stride, shared_graph ? &*shared_graph : nullptr);
                out.finals = res.finals;
                out.stats = res.stats;
                if (res.violation) out.first_violation_step = res.violation->step;
                out.max_dev_ratio = res.max_dev_ratio;
                for (const auto& tr : res.traces) {
                    out.finals[tr.var + "_plus"] = tr.final_transform_plus;
                    out.finals[tr.var + "_minus"] = tr.final_transform_minus;
                }
                if (r == 0) {
                    std::lock_guard<std::mutex> lock(traces_mutex);
                    traces0 = std::move(res.traces);
                }
            } catch (const std::invalid_argument& e) {
                // config error: abort the whole ensemble
                std::lock_guard<std::mutex> lock(traces_mutex);
                config_error = true;
                config_error_msg = e.what();
                return;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            report.replicas[r] = std::move(out);
        }
    };

    int workers = cfg.workers > 0 ? cfg.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<int>(workers, cfg.replicas);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (config_error) throw std::invalid_argument(config_error_msg);

    // aggregate in replica-index order
    std::map<std::string, std::vector<double>> columns;
    int violations = 0;
    std::map<std::string, int> plus_positive;
    std::map<std::string, int> plus_total;
    double max_variance = 0.0;
    for (const auto& out : report.replicas) {
        if (!out.error.empty()) continue;
        for (const auto& [k, v] : out.finals) {
            columns[k].push_back(v);
            auto pos = k.rfind("_plus");
            if (pos != std::string::npos && pos == k.size() - 5) {
                ++plus_total[k.substr(0, pos)];
                if (v > 0.0) ++plus_positive[k.substr(0, pos)];
            }
        }
        if (out.first_violation_step) ++violations;
        auto it = out.stats.find("variance_total");
        if (it != out.stats.end()) max_variance = std::max(max_variance, it->second);
    }
    for (auto& [k, col] : columns) {
        double mean = mean_of(col);
        report.mean_finals[k] = mean;
        report.stddev_finals[k] = stddev_of(col, mean);
    }
    report.violation_frequency =
        static_cast<double>(violations) / static_cast<double>(cfg.replicas);
    for (const auto& [var, total] : plus_total)
        report.plus_positive_frequency[var] =
            static_cast<double>(plus_positive[var]) / static_cast<double>(total);

    // tail bounds at the run's natural lambda
    const double dn = static_cast<double>(cfg.n);
    if (cfg.process == Process::Matching) {
        double s = cfg.K * std::sqrt(static_cast<double>(cfg.d) * std::log(dn));
        report.lambda = s;
        report.azuma = azuma_bound({gm::kIncrementBound, std::max<std::int64_t>(1, cfg.n / 2), s});
        report.freedman = freedman_bound({gm::kIncrementBound, std::max(max_variance, 0.0), s});
    } else {
        double eps0 = (cfg.process == Process::BallsBins &&
                       cfg.bb_variant == bb::EnvelopeVariant::SelfCorrect)
                          ? std::pow(dn, -0.5 + cfg.alpha / 2.0)
                          : std::pow(dn, -1.0 / 3.0);
        double lambda = dn * eps0;
        double C = 6.0;
        std::int64_t m = std::max<std::int64_t>(1, effective_steps(cfg));
        report.lambda = lambda;
        report.azuma = azuma_bound({C, m, lambda});
        report.freedman = freedman_bound({C, C * C * static_cast<double>(m), lambda});
    }

    if (!cfg.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec) throw IoError("run_ensemble: cannot create " + cfg.out_dir);
        emit_timeseries(traces0, cfg.out_dir + "/timeseries.csv");
        std::string var = cfg.plot_var.empty()
                              ? (traces0.empty() ? std::string() : traces0.front().var)
                              : cfg.plot_var;
        emit_plotdata(traces0, cfg.out_dir + "/plotdata.csv", var);
        emit_report(report, cfg.out_dir + "/report.json");
    }

    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

namespace {
void write_rows(std::ofstream& out, const std::vector<MartingaleTrace>& traces,
                const std::string& only_var) {
    struct Entry {
        std::int64_t step;
        const std::string* var;
        const TraceRow* row;
    };
    std::vector<Entry> entries;
    for (const auto& tr : traces) {
        if (!only_var.empty() && tr.var != only_var) continue;
        for (const auto& row : tr.rows) entries.push_back({row.step, &tr.var, &row});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.step != b.step ? a.step < b.step : *a.var < *b.var;
    });
    out << "step,t,var,value,traj,lo,hi\n";
    for (const auto& e : entries) {
        out << e.step << ',' << fmt9(e.row->t) << ',' << *e.var << ',' << fmt9(e.row->value)
            << ',' << fmt9(e.row->traj) << ',' << fmt9(e.row->lo) << ',' << fmt9(e.row->hi)
            << '\n';
    }
}
}  // namespace

void emit_timeseries(const std::vector<MartingaleTrace>& traces, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_timeseries: cannot open " + path);
    write_rows(out, traces, "");
    if (!out) throw IoError("emit_timeseries: write failed");
}

void emit_plotdata(const std::vector<MartingaleTrace>& traces, const std::string& path,
                   const std::string& var) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_plotdata: cannot open " + path);
    write_rows(out, traces, var);
    if (!out) throw IoError("emit_plotdata: write failed");
}

void emit_report(const EnsembleReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    j["version"] = "dem-lab-report-v1";
    const auto& cfg = report.config;
    nlohmann::ordered_json jc;
    switch (cfg.process) {
        case Process::BallsBins:
            jc["process"] = "balls-bins";
            jc["m"] = cfg.m;
            jc["kappa"] = cfg.kappa;
            jc["envelope"] =
                cfg.bb_variant == bb::EnvelopeVariant::Basic ? "basic" : "selfcorrect";
            jc["alpha"] = cfg.alpha;
            break;
        case Process::ErComponents:
            jc["process"] = "er-components";
            jc["c"] = cfg.c;
            jc["kappa"] = cfg.kappa;
            break;
        case Process::Matching:
            jc["process"] = "matching";
            jc["d"] = cfg.d;
            jc["gen"] = cfg.generator;
            jc["K"] = cfg.K;
            break;
    }
    jc["n"] = cfg.n;
    jc["base_seed"] = cfg.base_seed;
    jc["replicas"] = cfg.replicas;
    j["config"] = jc;

    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (const auto& out : report.replicas) {
        nlohmann::ordered_json o;
        o["index"] = out.index;
        o["seed"] = out.seed;
        if (!out.error.empty()) {
            o["error"] = out.error;
        } else {
            o["finals"] = out.finals;
            if (out.first_violation_step)
                o["first_violation_step"] = *out.first_violation_step;
            o["max_dev_ratio"] = out.max_dev_ratio;
            if (!out.stats.empty()) o["stats"] = out.stats;
        }
        jr.push_back(std::move(o));
    }
    j["replicas"] = std::move(jr);

    nlohmann::ordered_json ja;
    ja["mean_finals"] = report.mean_finals;
    ja["stddev_finals"] = report.stddev_finals;
    ja["violation_frequency"] = report.violation_frequency;
    ja["plus_positive_frequency"] = report.plus_positive_frequency;
    ja["lambda"] = report.lambda;
    ja["azuma_bound"] = report.azuma;
    ja["freedman_bound"] = report.freedman;
    j["aggregate"] = std::move(ja);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("emit_report: write failed");
}

// ---------------------------------------------------------------------------
// verify suite

namespace {

VerifySummary verify_identities(int kmax) {
    VerifySummary s;
    for (int k = 1; k <= kmax; ++k) {
        auto id = traj::verify_tree_identity(k);
        s.cases.push_back({"tree-identity k=" + std::to_string(k), id.equal(), 0.0});
    }
    return s;
}

VerifySummary verify_ode() {
    VerifySummary s;
    const double h = 1e-3;
    {
        auto sys = traj::balls_system(4);
        auto sol = traj::integrate_rk4(sys, 2.0, h);
        double err = 0.0;
        for (int k = 0; k <= 4; ++k)
            err = std::max(err, std::abs(sol.back()[k] - traj::balls(k, 2.0)));
        s.cases.push_back({"ode balls K=4 t=2", err <= 1e-6, err});
    }
    {
        auto sys = traj::components_system(4);
        auto sol = traj::integrate_rk4(sys, 1.0, h);
        double err = 0.0;
        for (int k = 1; k <= 4; ++k)
            err = std::max(err, std::abs(sol.back()[k - 1] - traj::components(k, 1.0)));
        s.cases.push_back({"ode components K=4 t=1", err <= 1e-6, err});
    }
    return s;
}

// brute-force average of dX_k over the n equally likely bin choices
double bb_enumeration_drift(const bb::BallsBinsState& state, int k) {
    double sum = 0.0;
    for (auto load : state.loads) {
        int l = static_cast<int>(load);
        sum += (l + 1 == k ? 1.0 : 0.0) - (l == k ? 1.0 : 0.0);
    }
    return sum / static_cast<double>(state.n);
}

// enumeration of dD_v over all alive edges
double gm_enumeration_drift(const gm::MatchingState& state, std::int32_t v) {
    const auto& g = *state.graph;
    std::int64_t sum = 0;
    for (std::int32_t eid : state.alive) {
        auto [p, q] = g.edges[eid];
        int hits = 0;
        for (std::int32_t end : {p, q}) {
            const std::size_t base = static_cast<std::size_t>(end) * g.d;
            for (int j = 0; j < g.d; ++j)
                if (g.adj[base + j] == v) ++hits;
        }
        sum -= hits;
    }
    return static_cast<double>(sum) / static_cast<double>(state.alive_count());
}

VerifySummary verify_drift_oracles(std::uint64_t seed) {
    VerifySummary s;
    {
        auto state = bb::init(10, seed);
        double worst = 0.0;
        for (int step = 0; step < 200; ++step) {
            for (int k = 0; k <= 5; ++k)
                worst = std::max(worst,
                                 std::abs(bb::exact_drift(state, k) - bb_enumeration_drift(state, k)));
            bb::step(state);
        }
        s.cases.push_back({"bb drift n=10, 200 states", worst <= 1e-15, worst});
    }
    {
        double worst_ratio = 0.0;
        bool ok = true;
        Xoshiro256ss lens(seed);
        for (int trial = 0; trial < 100; ++trial) {
            auto state = er::init(10, derive_seed(seed, trial));
            auto steps = static_cast<int>(lens.next_below(20));
            for (int q = 0; q < steps; ++q) er::step(state);
            for (int k = 1; k <= 5; ++k) {
                double slack = 40.0 * k * k * k / static_cast<double>(state.n);
                double diff =
                    std::abs(er::exact_drift_oracle(state, k) - er::formula_drift(state, k));
                worst_ratio = std::max(worst_ratio, diff / slack);
                if (diff > slack) ok = false;
            }
        }
        s.cases.push_back({"er drift n=10, 100 states, k<=5", ok, worst_ratio});
    }
    {
        auto g = gm::gen_pairing(20, 3, seed);
        gm::MatchingState state(g, derive_seed(seed, 7));
        double worst = 0.0;
        while (state.alive_count() > 0) {
            for (std::int32_t v = 0; v < g.n; ++v)
                worst = std::max(worst,
                                 std::abs(gm::exact_drift(state, v) - gm_enumeration_drift(state, v)));
            if (!gm::match_step(state)) break;
        }
        s.cases.push_back({"matching drift n=20 d=3 path", worst <= 1e-12, worst});
    }
    return s;
}

}  // namespace

VerifySummary verify_suite(const std::string& kind, int kmax, std::uint64_t seed) {
    if (kind == "identities") return verify_identities(kmax);
    if (kind == "ode") return verify_ode();
    if (kind == "drift-oracles") return verify_drift_oracles(seed);
    throw std::invalid_argument("verify_suite: unknown kind " + kind);
}

}  // namespace demlab::harness
