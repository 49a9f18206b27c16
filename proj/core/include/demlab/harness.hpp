#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demlab/balls_bins.hpp"
#include "demlab/er_components.hpp"
#include "demlab/matching.hpp"
#include "demlab/run_types.hpp"

namespace demlab::harness {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Process { BallsBins, ErComponents, Matching };

struct ExperimentConfig {
    Process process = Process::BallsBins;
    std::int64_t n = 10000;
    std::uint64_t base_seed = 0;
    int replicas = 1;
    std::int64_t stride = 0;  // 0 = auto: max(1, m / 2000)
    std::string out_dir;
    int workers = 0;  // 0 = hardware concurrency
    double max_violation_rate = 0.05;
    std::string plot_var;  // empty = first variable

    // balls-bins
    std::int64_t m = 0;
    int kappa = 4;
    bb::EnvelopeVariant bb_variant = bb::EnvelopeVariant::SelfCorrect;
    double alpha = 0.1;

    // er-components
    double c = 0.5;

    // matching
    int d = 0;
    std::string generator = "circulant";  // or "pairing"
    double K = 2.0;
    std::string graph_file;  // optional fixture to load instead of generating
};

struct ReplicaOutcome {
    int index = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> finals;
    std::optional<std::int64_t> first_violation_step;
    double max_dev_ratio = 0.0;
    std::map<std::string, double> stats;
    double final_transform_plus = 0.0;   // for the reported variable
    double final_transform_minus = 0.0;
    std::string error;  // non-empty if the replica failed at runtime
};

struct EnsembleReport {
    ExperimentConfig config;
    std::vector<ReplicaOutcome> replicas;
    std::map<std::string, double> mean_finals;
    std::map<std::string, double> stddev_finals;
    double violation_frequency = 0.0;
    // per tracked variable, fraction of replicas whose final + transform is > 0
    std::map<std::string, double> plus_positive_frequency;
    double lambda = 0.0;
    double azuma = 0.0;
    double freedman = 0.0;
    double wall_clock_sec = 0.0;  // reported on stdout, not serialized
};

// Runs the configured ensemble; replica 0's traces are written as the run's
// time-series files when out_dir is set.
EnsembleReport run_ensemble(const ExperimentConfig& config);

void emit_timeseries(const std::vector<MartingaleTrace>& traces, const std::string& path);
// Same schema restricted to one variable.
void emit_plotdata(const std::vector<MartingaleTrace>& traces, const std::string& path,
                   const std::string& var);
void emit_report(const EnsembleReport& report, const std::string& path);

// Deterministic verification dispatch: "identities", "ode" or "drift-oracles".
struct VerifyCase {
    std::string name;
    bool pass = false;
    double measured_error = 0.0;
};
struct VerifySummary {
    std::vector<VerifyCase> cases;
    bool all_pass() const {
        for (const auto& c : cases)
            if (!c.pass) return false;
        return true;
    }
};
VerifySummary verify_suite(const std::string& kind, int kmax = 12, std::uint64_t seed = 1);

}  // namespace demlab::harness
