#include "cmx/abm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>

#include "cmx/error.hpp"
#include "cmx/rng.hpp"

namespace cmx {

namespace {

void require(bool ok, const std::string &what)
{
    if (!ok)
        fail(ErrorCode::config_invalid, what);
}

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

bool is_range(const UniformRange &r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; }

TokenAmount to_base_units(double tokens)
{
    return static_cast<TokenAmount>(std::llround(tokens * static_cast<double>(base_units_per_token)));
}

double to_tokens(TokenAmount amount) { return static_cast<double>(amount) / static_cast<double>(base_units_per_token); }

/// Turns per-processor tallies into the reported metrics. Shared by the
/// in-memory run and the event-log replay so both round identically.
struct Tally {
    std::vector<TokenAmount> income;   // per processor
    std::vector<double> final_score;   // per processor
    std::vector<std::uint64_t> assigned; // per group
    std::vector<std::uint64_t> failed;   // per group
    std::uint64_t unmatched = 0;
    std::vector<std::vector<double>> trajectory;
};

SimMetrics finish(const SimConfig &config, std::uint32_t iteration, const Tally &t)
{
    const auto groups = config.group_success_rates.size();
    SimMetrics m;
    m.groups.resize(groups);
    m.unmatched = t.unmatched;
    m.trajectory = t.trajectory;
    std::vector<TokenAmount> group_income(groups, 0);
    std::vector<double> rewards(config.n_processors);
    for (std::uint32_t i = 0; i < config.n_processors; ++i) {
        const auto g = group_of(i, groups);
        group_income[g] += t.income[i];
        rewards[i] = to_tokens(t.income[i]);
        m.processors.push_back({iteration, processor_account(i), g, t.final_score[i], rewards[i]});
    }
    for (std::size_t g = 0; g < groups; ++g) {
        m.allocated += t.assigned[g];
        m.failed += t.failed[g];
    }
    const double group_size = static_cast<double>(config.n_processors / groups);
    for (std::size_t g = 0; g < groups; ++g) {
        auto &gm = m.groups[g];
        gm.success_rate = config.group_success_rates[g];
        gm.assigned = t.assigned[g];
        gm.failed = t.failed[g];
        gm.mean_reward = to_tokens(group_income[g]) / group_size;
        gm.share = m.allocated ? static_cast<double>(gm.assigned) / static_cast<double>(m.allocated) : 0.0;
    }
    m.failure_rate = m.allocated ? static_cast<double>(m.failed) / static_cast<double>(m.allocated) : 0.0;
    m.gini = rewards.empty() ? 0.0 : gini(rewards);
    return m;
}

std::vector<double> group_means(const SimConfig &config, std::span<const double> scores)
{
    const auto groups = config.group_success_rates.size();
    std::vector<double> sums(groups, 0.0);
    for (std::uint32_t i = 0; i < config.n_processors; ++i)
        sums[group_of(i, groups)] += scores[i];
    const double group_size = static_cast<double>(config.n_processors / groups);
    for (auto &s : sums)
        s /= group_size;
    return sums;
}

} // namespace

void validate(const SimConfig &c)
{
    require(!c.group_success_rates.empty(), "sim.group_success_rates must not be empty");
    require(c.n_processors > 0, "sim.n_processors must be positive");
    require(c.n_processors % c.group_success_rates.size() == 0,
            "sim.n_processors must be divisible by the number of groups");
    for (double p : c.group_success_rates)
        require(is_fraction(p), "sim.group_success_rates entries must lie in [0,1]");
    require(is_fraction(c.p_min_rep_consumer), "sim.p_min_rep_consumer must lie in [0,1]");
    require(is_range(c.min_rep_range) && c.min_rep_range.lo >= 0.0 && c.min_rep_range.hi <= 1.0,
            "sim.min_rep_range must be an ordered sub-range of [0,1]");
    require(is_range(c.reward_range) && c.reward_range.lo > 0.0, "sim.reward_range must be ordered and positive");
    require(is_range(c.ask_range) && c.ask_range.lo >= 0.0, "sim.ask_range must be ordered and non-negative");
    require(c.step_ms > 0 && c.execution_ms > 0 && c.execution_ms <= c.step_ms,
            "sim.execution_ms must lie in (0, sim.step_ms]");
}

std::uint64_t iteration_seed(std::uint64_t seed, std::uint32_t iteration)
{
    return mix_seed(seed ^ mix_seed(iteration + 1));
}

std::uint32_t group_of(std::uint32_t index, std::size_t group_count)
{
    return static_cast<std::uint32_t>(index % group_count);
}

AccountId processor_account(std::uint32_t index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%04u", index);
    return AccountId{buf};
}

AccountId consumer_account(std::uint32_t index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "c%04u", index);
    return AccountId{buf};
}

IterationRun run_iteration(const SimConfig &config, std::uint32_t iteration, bool keep_events)
{
    validate(config);
    const auto groups = config.group_success_rates.size();
    const std::uint64_t seed = iteration_seed(config.seed, iteration);
    Rng consumer_rng(mix_seed(seed ^ 0xc0));
    Rng processor_rng(mix_seed(seed ^ 0x9e));

    Orchestrator market(OrchestratorConfig{
        .reputation = config.reputation,
        .grace = config.grace,
        .reputation_gating = config.reputation_enabled,
    });

    const TimestampMs horizon = static_cast<TimestampMs>(config.steps + 2) * config.step_ms;
    std::vector<AccountId> processors;
    std::vector<AccountId> consumers;
    for (std::uint32_t i = 0; i < config.n_processors; ++i) {
        processors.push_back(processor_account(i));
        market.attestations().register_record({processors.back(), "sim-device", 0, 0, horizon, false});
        market.advertise({.processor = processors.back()});
    }
    for (std::uint32_t j = 0; j < config.n_consumers; ++j)
        consumers.push_back(consumer_account(j));
    std::unordered_map<AccountId, std::uint32_t> index_of;
    for (std::uint32_t i = 0; i < config.n_processors; ++i)
        index_of.emplace(processors[i], i);

    Tally tally;
    tally.income.assign(config.n_processors, 0);
    tally.assigned.assign(groups, 0);
    tally.failed.assign(groups, 0);

    const auto reward_lo = to_base_units(config.reward_range.lo);
    const auto reward_hi = to_base_units(config.reward_range.hi);
    const auto ask_lo = to_base_units(config.ask_range.lo);
    const auto ask_hi = to_base_units(config.ask_range.hi);

    IterationRun run;
    std::uint64_t next_id = 1;
    std::vector<std::tuple<TimestampMs, DeploymentId, std::uint32_t>> to_report;
    std::vector<double> scores(config.n_processors);
    std::vector<TokenAmount> asks(config.n_processors);
    for (std::uint32_t step = 0; step < config.steps; ++step) {
        const TimestampMs t0 = static_cast<TimestampMs>(step) * config.step_ms;

        to_report.clear();
        for (const auto &consumer : consumers) {
            const TokenAmount reward = consumer_rng.uniform_int(reward_lo, reward_hi);
            const bool gated = consumer_rng.bernoulli(config.p_min_rep_consumer);
            const double threshold = consumer_rng.uniform(config.min_rep_range.lo, config.min_rep_range.hi);
            DeploymentSpec spec{
                .id = DeploymentId{next_id++},
                .consumer = consumer,
                .schedule = {.start = t0,
                             .end = t0 + config.step_ms,
                             .interval = config.step_ms,
                             .duration = config.execution_ms,
                             .max_start_delay = config.step_ms - config.execution_ms},
                .reward_per_execution = reward,
            };
            if (config.reputation_enabled && gated)
                spec.min_reputation = std::min(threshold, std::nextafter(1.0, 0.0));
            // every request gets a fresh quote from every processor
            for (auto &ask : asks)
                ask = processor_rng.uniform_int(ask_lo, ask_hi);
            market.requote(asks);
            market.ledger().mint(consumer, reward);
            market.register_deployment(spec, t0);
            auto assignment = market.match(spec.id, t0);
            if (!assignment) {
                market.cancel(spec.id, t0);
                ++tally.unmatched;
                continue;
            }
            to_report.emplace_back(assignment->slots.front().end - 1, spec.id, index_of.at(assignment->processor));
        }

        std::sort(to_report.begin(), to_report.end());
        for (const auto &[at, id, proc] : to_report) {
            const auto g = group_of(proc, groups);
            const bool ok = processor_rng.bernoulli(config.group_success_rates[g]);
            ExecutionReport report{.deployment = id, .execution_index = 1, .reported_at = at};
            if (ok)
                report.outcome = ExecutionSuccess{"settled:" + std::to_string(id.value)};
            else
                report.outcome = ExecutionFailure{"execution failed"};
            const auto ack = market.submit_report(report, at);
            tally.income[proc] += ack.paid;
            ++tally.assigned[g];
            if (!ack.favorable)
                ++tally.failed[g];
        }

        market.advance_time(t0 + config.step_ms);
        market.retire_finished();
        for (std::uint32_t i = 0; i < config.n_processors; ++i)
            scores[i] = market.reputation_score(processors[i]);
        tally.trajectory.push_back(group_means(config, scores));
        if (keep_events) {
            auto events = market.take_events();
            run.events.insert(run.events.end(), events.begin(), events.end());
        } else {
            market.take_events();
        }
    }
    tally.final_score.resize(config.n_processors);
    for (std::uint32_t i = 0; i < config.n_processors; ++i)
        tally.final_score[i] = market.reputation_score(processors[i]);
    market.ledger().audit();

    run.metrics = finish(config, iteration, tally);
    return run;
}

SimMetrics metrics_from_events(const SimConfig &config, std::uint32_t iteration, std::span<const MarketEvent> events)
{
    validate(config);
    const auto groups = config.group_success_rates.size();
    std::unordered_map<AccountId, std::uint32_t> index_of;
    for (std::uint32_t i = 0; i < config.n_processors; ++i)
        index_of.emplace(processor_account(i), i);

    Tally tally;
    tally.income.assign(config.n_processors, 0);
    tally.assigned.assign(groups, 0);
    tally.failed.assign(groups, 0);
    std::vector<double> scores(config.n_processors, score(ReputationAccumulator{.params = config.reputation}));

    std::uint32_t step = 0;
    auto close_steps_until = [&](std::uint32_t upto) {
        for (; step < upto && step < config.steps; ++step)
            tally.trajectory.push_back(group_means(config, scores));
    };
    for (const auto &ev : events) {
        switch (ev.kind) {
            case EventKind::cancelled: ++tally.unmatched; break;
            case EventKind::success:
            case EventKind::failure:
            case EventKind::late_report:
            case EventKind::missed: {
                close_steps_until(static_cast<std::uint32_t>((ev.time - 1) / config.step_ms));
                const auto proc = index_of.at(*ev.processor);
                const auto g = group_of(proc, groups);
                ++tally.assigned[g];
                if (ev.kind == EventKind::success)
                    tally.income[proc] += ev.amount;
                else
                    ++tally.failed[g];
                scores[proc] = *ev.reputation_after;
                break;
            }
            default: break;
        }
    }
    close_steps_until(config.steps);
    tally.final_score = scores;
    return finish(config, iteration, tally);
}

ExperimentResult run_experiment(const SimConfig &config)
{
    validate(config);
    ExperimentResult result;
    for (std::uint32_t i = 0; i < config.iterations; ++i)
        result.iterations.push_back(run_iteration(config, i).metrics);

    auto &agg = result.aggregate;
    const auto groups = config.group_success_rates.size();
    agg.groups.resize(groups);
    for (std::size_t g = 0; g < groups; ++g)
        agg.groups[g].success_rate = config.group_success_rates[g];
    agg.trajectory.assign(config.steps, std::vector<double>(groups, 0.0));
    for (const auto &it : result.iterations) {
        for (std::size_t g = 0; g < groups; ++g) {
            agg.groups[g].assigned += it.groups[g].assigned;
            agg.groups[g].failed += it.groups[g].failed;
            agg.groups[g].mean_reward += it.groups[g].mean_reward;
        }
        agg.allocated += it.allocated;
        agg.failed += it.failed;
        agg.unmatched += it.unmatched;
        agg.gini += it.gini;
        for (std::size_t s = 0; s < it.trajectory.size(); ++s) {
            for (std::size_t g = 0; g < groups; ++g)
                agg.trajectory[s][g] += it.trajectory[s][g];
        }
        agg.processors.insert(agg.processors.end(), it.processors.begin(), it.processors.end());
    }
    const double n = config.iterations ? static_cast<double>(config.iterations) : 1.0;
    for (auto &g : agg.groups) {
        g.mean_reward /= n;
        g.share = agg.allocated ? static_cast<double>(g.assigned) / static_cast<double>(agg.allocated) : 0.0;
    }
    agg.gini /= n;
    agg.failure_rate = agg.allocated ? static_cast<double>(agg.failed) / static_cast<double>(agg.allocated) : 0.0;
    for (auto &row : agg.trajectory) {
        for (auto &x : row)
            x /= n;
    }
    return result;
}

double gini(std::span<const double> values)
{
    if (values.empty())
        fail(ErrorCode::empty_input, "gini of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() >= 0.0) || !std::isfinite(sorted.back()))
        fail(ErrorCode::invalid_input, "gini needs finite non-negative values");
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (!(total > 0.0))
        return 0.0;
    // sum_{i<j} (x_j - x_i) = sum_i (2i - n + 1) x_i over ascending order, 0-based i
    const double n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
    return std::max(0.0, weighted / (n * total));
}

} // namespace cmx
