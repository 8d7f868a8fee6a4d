#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmx/orchestrator.hpp"
#include "cmx/reputation.hpp"
#include "cmx/scheduler.hpp"

namespace cmx {

struct UniformRange {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const UniformRange &) const = default;
};

/// Agent-based marketplace experiment. Amount ranges are in whole tokens.
struct SimConfig {
    std::uint32_t n_processors = 300;
    std::uint32_t n_consumers = 900;
    std::uint32_t steps = 200;
    std::uint32_t iterations = 10;
    std::vector<double> group_success_rates{0.8, 0.9, 0.99};
    bool reputation_enabled = true;
    double p_min_rep_consumer = 0.5;
    UniformRange min_rep_range{0.8, 1.0};
    UniformRange reward_range{90.0, 110.0};
    /// Every processor quotes a fresh ask for each request.
    UniformRange ask_range{0.0, 90.0};
    std::uint64_t seed = 1;
    /// One step spans step_ms; each deployment is a single execution of
    /// execution_ms that may start anywhere within the step.
    DurationMs step_ms = 1'000;
    DurationMs execution_ms = 100;
    ReputationParams reputation;
    GracePolicy grace;

    bool operator==(const SimConfig &) const = default;
};

/// Throws config_invalid.
void validate(const SimConfig &config);

struct GroupMetrics {
    double success_rate = 0.0;
    double mean_reward = 0.0; // mean cumulative income per processor, tokens
    double share = 0.0;       // fraction of allocated deployments
    std::uint64_t assigned = 0;
    std::uint64_t failed = 0;

    bool operator==(const GroupMetrics &) const = default;
};

struct ProcessorRecord {
    std::uint32_t iteration = 0;
    AccountId processor;
    std::uint32_t group = 0;
    double reputation = 0.0;
    double cumulative_reward = 0.0; // tokens

    bool operator==(const ProcessorRecord &) const = default;
};

struct SimMetrics {
    std::vector<GroupMetrics> groups;
    std::uint64_t allocated = 0;
    std::uint64_t failed = 0;
    std::uint64_t unmatched = 0;
    double failure_rate = 0.0;
    double gini = 0.0;
    /// trajectory[step][group] = mean reputation score after the step
    std::vector<std::vector<double>> trajectory;
    std::vector<ProcessorRecord> processors;

    bool operator==(const SimMetrics &) const = default;
};

struct IterationRun {
    SimMetrics metrics;
    std::vector<MarketEvent> events; // only filled when requested
};

/// Seed of iteration `i`, shared by paired scenarios.
std::uint64_t iteration_seed(std::uint64_t seed, std::uint32_t iteration);

/// Group of processor `index`; groups are interleaved by index.
std::uint32_t group_of(std::uint32_t index, std::size_t group_count);

AccountId processor_account(std::uint32_t index);
AccountId consumer_account(std::uint32_t index);

IterationRun run_iteration(const SimConfig &config, std::uint32_t iteration, bool keep_events = false);

/// Recomputes an iteration's metrics from its event log alone.
SimMetrics metrics_from_events(const SimConfig &config, std::uint32_t iteration, std::span<const MarketEvent> events);

struct ExperimentResult {
    SimMetrics aggregate; // group means and gini averaged, rates pooled, processor records concatenated
    std::vector<SimMetrics> iterations;
};

ExperimentResult run_experiment(const SimConfig &config);

/// Mean absolute difference over all ordered pairs divided by twice the mean.
/// 0 for all-equal or all-zero input; empty_input when empty.
double gini(std::span<const double> values);

} // namespace cmx
