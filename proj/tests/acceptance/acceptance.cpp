#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cmx/abm.hpp"
#include "cmx/reputation.hpp"
#include "cmx/scheduler.hpp"
#include "cmx/staked_compute.hpp"
#include "oracles.hpp"
#include "random_economy.hpp"
#include "temp_dir.hpp"

using namespace cmx;

namespace {

// tolerances
constexpr double reputation_rel_tol = 1e-9;
constexpr double convergence_tol = 1e-6;
constexpr double delegation_rel_tol = 1e-9;
constexpr double reputation_budget_s = 10.0;
constexpr double scheduling_budget_s = 30.0;
constexpr double economy_budget_s = 20.0;
constexpr double abm_budget_s = 300.0;
constexpr double min_failure_drop = 0.20;
constexpr double min_high_rise = 0.25;

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double got, double want)
{
    if (want == 0.0)
        return std::fabs(got);
    return std::fabs(got - want) / std::fabs(want);
}

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

Verdict reputation_exactness()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lambdas[] = {0.9, 0.98, 0.999};
    double worst = 0.0;
    bool in_range = true;
    for (int seq = 0; seq < 1000; ++seq) {
        const double lambda = lambdas[seq % 3];
        const bool from_rewards = seq % 2 == 0;
        const int len = 1 + static_cast<int>(rng() % 1000);
        ReputationAccumulator acc{.params = ReputationParams(lambda)};
        std::vector<oracle::Outcome> history;
        std::vector<double> rewards;
        const double p_fav = u(rng);
        for (int i = 0; i < len; ++i) {
            const bool fav = u(rng) < p_fav;
            double w = 0.0;
            if (from_rewards) {
                const TokenAmount reward = 1 + rng() % 10'000;
                w = oracle::weight(rewards, static_cast<double>(reward));
                rewards.push_back(static_cast<double>(reward));
                acc = record_outcome(acc, fav, reward);
            } else {
                w = 1.0 - u(rng);
                acc = update(acc, fav, w);
            }
            history.push_back({fav, w});
            const double sc = score(acc);
            in_range = in_range && sc > 0.0 && sc <= 1.0;
            if (i + 1 == len || rng() % 100 == 0) {
                const auto [r, s] = oracle::batch_sums(history, lambda);
                worst = std::max({worst, rel_err(acc.r, r), rel_err(acc.s, s),
                                  rel_err(sc, oracle::batch_score(history, lambda))});
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= reputation_rel_tol && in_range && secs < reputation_budget_s,
            "max rel err " + fmt(worst) + ", scores in (0,1] " + (in_range ? "yes" : "no") + ", " + fmt(secs) + " s"};
}

Verdict reputation_limits()
{
    bool ok = true;
    std::string detail;
    for (double lambda : {0.9, 0.98, 0.999}) {
        ReputationAccumulator acc{.params = ReputationParams(lambda)};
        for (int i = 0; i < 40'000; ++i)
            acc = update(acc, true, 1.0);
        const double bound = 1.0 / (1.0 - lambda);
        const double r_err = std::fabs(acc.r - bound) / bound;
        const double s_err = std::fabs(score(acc) - 1.0);
        ok = ok && r_err <= convergence_tol && s_err <= convergence_tol;
        detail += "lambda " + fmt(lambda) + ": r err " + fmt(r_err) + ", score err " + fmt(s_err) + "; ";
    }
    const bool mu_exact = ReputationParams(0.9).mu() == 11.0 / 12.0;
    return {ok && mu_exact, detail + "mu(0.9) == 11/12 " + (mu_exact ? "yes" : "no")};
}

Verdict scheduling_oracle()
{
    std::mt19937_64 rng(77);
    auto pick = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };
    double engine_secs = 0.0;
    int mismatches = 0;
    int feasible = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 10'000; ++i) {
        Schedule s;
        s.start = pick(0, 2'000);
        s.interval = pick(1, 3'000);
        s.duration = pick(1, s.interval);
        s.max_start_delay = pick(0, 1'500);
        s.end = std::min<std::int64_t>(10'000, s.start + s.duration + pick(0, 8'000));
        if (s.end < s.start + s.duration)
            s.end = s.start + s.duration;
        std::vector<oracle::Interval> busy;
        std::vector<BusyInterval> intervals;
        std::int64_t t = pick(0, 500);
        const std::int64_t mean_gap = pick(10, 3'000);
        while (t < 10'000) {
            const std::int64_t len = pick(1, mean_gap);
            busy.push_back({t, t + len});
            intervals.push_back({t, t + len, DeploymentId{static_cast<std::uint64_t>(intervals.size() + 1)}});
            t += len + pick(0, 2 * mean_gap);
        }
        const ProcessorCalendar cal(intervals);
        const auto e0 = Clock::now();
        const auto got = find_start_delay(s, cal);
        engine_secs += seconds_since(e0);
        const auto want = oracle::smallest_delay(s, busy);
        if (got != want)
            ++mismatches;
        if (want)
            ++feasible;
    }
    const double total = seconds_since(t0);
    return {mismatches == 0 && total < scheduling_budget_s,
            std::to_string(mismatches) + " mismatches, " + std::to_string(feasible) + " feasible, engine " +
                fmt(engine_secs) + " s, with oracle " + fmt(total) + " s"};
}

struct AbmPair {
    ExperimentResult on;
    ExperimentResult off;
    double secs = 0.0;
};

AbmPair run_abm_pair()
{
    const auto t0 = Clock::now();
    SimConfig on;
    SimConfig off;
    off.reputation_enabled = false;
    AbmPair p{run_experiment(on), run_experiment(off), 0.0};
    p.secs = seconds_since(t0);
    return p;
}

Verdict abm_direction(const AbmPair &p)
{
    const auto &on = p.on.aggregate;
    const auto &off = p.off.aggregate;
    const double fail_drop = (off.failure_rate - on.failure_rate) / off.failure_rate;
    auto change = [&](std::size_t g) {
        return (on.groups[g].mean_reward - off.groups[g].mean_reward) / off.groups[g].mean_reward;
    };
    const double low = change(0), medium = change(1), high = change(2);
    const bool ok = fail_drop >= min_failure_drop && high >= min_high_rise && medium < 0.0 && low < 0.0 &&
                    on.gini > off.gini && p.secs < abm_budget_s;
    return {ok, "failure rate " + fmt(off.failure_rate) + " -> " + fmt(on.failure_rate) + " (drop " +
                    fmt(100 * fail_drop) + "%), income change high " + fmt(100 * high) + "% medium " +
                    fmt(100 * medium) + "% low " + fmt(100 * low) + "%, gini " + fmt(off.gini) + " -> " +
                    fmt(on.gini) + ", " + fmt(p.secs) + " s"};
}

Verdict dataset_shape(const AbmPair &p)
{
    const auto a = p.on.aggregate.processors.size();
    const auto b = p.off.aggregate.processors.size();
    return {a == 3000 && b == 3000, std::to_string(a) + " and " + std::to_string(b) + " processor rows"};
}

Verdict economy_conservation()
{
    const auto t0 = Clock::now();
    int epochs = 0;
    int failures = 0;
    int slashes = 0;
    auto on_epoch = [&](const std::vector<StakeCommitment> &before, const RewardLedger &led,
                        const InflationConfig &config) {
        ++epochs;
        const TokenAmount accounted = led.paid_out() + led.slash_from_rewards() + led.treasury + led.collators;
        if (accounted != led.emission)
            ++failures;
        std::array<TokenAmount, metric_count> staked{}, base{};
        for (const auto &s : led.staked_shares)
            staked[static_cast<std::size_t>(s.pool)] += s.amount;
        for (const auto &s : led.base_shares)
            base[static_cast<std::size_t>(s.pool)] += s.amount;
        TokenAmount residues = 0;
        for (std::size_t p = 0; p < metric_count; ++p) {
            if (staked[p] > led.staked_tranche[p] || base[p] > led.base_tranche[p])
                ++failures;
            residues += led.staked_tranche[p] - staked[p] + led.base_tranche[p] - base[p];
        }
        if (residues > led.treasury)
            ++failures;
        std::size_t live = 0;
        for (const auto &c : before) {
            if (c.status.phase == CommitmentPhase::released)
                continue;
            const auto &sl = led.commitments.at(live++).slash;
            if (sl.penalty == 0)
                continue;
            ++slashes;
            const long double cap = config.max_slash_rate * static_cast<long double>(c.total_stake());
            const long double psi = static_cast<long double>(sl.penalty);
            if (psi > cap || sl.burned + sl.to_slasher != sl.penalty || std::fabs(sl.burned - 0.9L * psi) > 1.0L ||
                std::fabs(sl.to_slasher - 0.1L * psi) > 1.0L)
                ++failures;
        }
    };
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto check = fixture::run_random_economy(seed, 25, on_epoch);
        if (!check.conserved || check.created != check.expected_created)
            ++failures;
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && epochs == 1000 && secs < economy_budget_s,
            std::to_string(epochs) + " epochs, " + std::to_string(slashes) + " slashes, " + std::to_string(failures) +
                " violations, " + fmt(secs) + " s"};
}

Verdict delegation_algebra()
{
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    constexpr EpochIndex tau_max = InflationConfig::default_tau_max;
    double worst = 0.0;
    int integer_mismatch = 0;
    int boundary_failures = 0;
    const BenchmarkVector unit{{1, 1, 1, 1}};
    for (int i = 0; i < 10'000; ++i) {
        const TokenAmount own = 1 + rng() % 1'000'000'000;
        auto c = create_commitment(AccountId{"c"}, own, 1 + rng() % tau_max, unit, scaled(unit, 2.0),
                                   static_cast<double>(rng() % 1'000'001) / 1e6, tau_max);
        const int n = static_cast<int>(rng() % 6);
        TokenAmount delegated = 0;
        for (int d = 0; d < n; ++d) {
            const TokenAmount stake = 1 + rng() % (9 * own / 6 + 1);
            if (delegated + stake > 9 * own)
                break;
            c.delegations.push_back({AccountId{"d" + std::to_string(d)}, stake, 1 + rng() % tau_max});
            delegated += stake;
        }

        const double wc = committer_weight(c, tau_max);
        const double wd = delegators_weight(c, tau_max);
        const double rc = 1.0 + 1e12 * u(rng);
        double delegators = 0.0;
        for (const auto &d : c.delegations)
            delegators += delegator_reward(delegation_weight(d, tau_max), c.delegation_fee, rc, wc, wd, 0.0);
        const double committer = rc * (wc + c.delegation_fee * wd) / (wc + wd);
        worst = std::max(worst, rel_err(committer + delegators, rc));

        const auto rc_int = static_cast<TokenAmount>(rc);
        const auto split = split_reward(c, rc_int, tau_max);
        TokenAmount total = split.committer;
        for (auto x : split.delegators)
            total += x;
        if (total != rc_int)
            ++integer_mismatch;

        // ratio: total may reach ten times the committer's own stake, not one unit more
        std::array<double, metric_count> loose{};
        loose.fill(1e30);
        const TokenAmount room = 10 * own - c.total_stake();
        if (room > 0 && validate_delegation(c, {AccountId{"x"}, room, 1}, loose))
            ++boundary_failures;
        if (validate_delegation(c, {AccountId{"x"}, room + 1, 1}, loose) != DelegationRejection::ratio)
            ++boundary_failures;

        // cap: total may reach T * m in every pool; committed compute is 1 per pool
        const TokenAmount cap_total = c.total_stake() + 1 + rng() % 1'000;
        std::array<double, metric_count> tight{};
        tight.fill(1e30);
        tight[rng() % metric_count] = static_cast<double>(cap_total);
        const TokenAmount to_cap = cap_total - c.total_stake();
        if (c.total_stake() + to_cap + 1 <= 10 * own) {
            if (validate_delegation(c, {AccountId{"x"}, to_cap, 1}, tight))
                ++boundary_failures;
            if (validate_delegation(c, {AccountId{"x"}, to_cap + 1, 1}, tight) != DelegationRejection::cap)
                ++boundary_failures;
        }
    }
    return {worst <= delegation_rel_tol && integer_mismatch == 0 && boundary_failures == 0,
            "max rel err " + fmt(worst) + ", integer mismatches " + std::to_string(integer_mismatch) +
                ", boundary failures " + std::to_string(boundary_failures)};
}

Verdict slashing_point_value()
{
    const InflationConfig config;
    const TokenAmount stake = 1'000'000 * base_units_per_token;
    const BenchmarkVector committed{{100, 100, 100, 100}};
    const auto c = create_commitment(AccountId{"c"}, stake, config.tau_max, committed, scaled(committed, 1.25), 0.0,
                                     config.tau_max);
    const double ram_only[4] = {0, 0, 1, 0};
    const auto expected = static_cast<TokenAmount>(
        std::floor(oracle::slash_penalty(static_cast<long double>(stake), ram_only, 0.003424657534L / 100.0L)));
    const auto got = slash(c, BenchmarkVector{{100, 100, 0, 100}}, config).penalty;
    return {got == expected && expected == 15'807'956,
            "penalty " + std::to_string(got) + " base units, oracle " + std::to_string(expected)};
}

int shell(const std::string &cmd)
{
    return std::system(cmd.c_str());
}

Verdict cli_determinism()
{
    fixture::TempDir dir;
    const std::string cli = CMX_CLI_PATH;
    const std::string src = CMX_SOURCE_DIR;
    fixture::write_file(dir / "sim.json",
                        R"({"sim": {"n_processors": 30, "n_consumers": 90, "steps": 40, "iterations": 3, "seed": 5}})");
    std::vector<std::string> failures;
    for (const char *run : {"a", "b"}) {
        const auto out = dir / run;
        std::filesystem::create_directories(out);
        const std::string q = "\"";
        const std::vector<std::string> cmds{
            q + cli + q + " simulate --scenario " + q + (dir / "sim.json").string() + q + " --out " + q +
                (out / "sim_csv").string() + q + " > /dev/null",
            q + cli + q + " simulate --scenario " + q + (dir / "sim.json").string() + q + " --format json --out " + q +
                (out / "sim_json").string() + q + " > /dev/null",
            q + cli + q + " epochs --scenario " + q + src + "/scenarios/economy_shortfall.json" + q + " --out " + q +
                (out / "epochs").string() + q + " > /dev/null",
            q + cli + q + " match " + q + src + "/scenarios/match_deployments.json" + q + " " + q + src +
                "/scenarios/match_advertisements.json" + q + " > " + q + (out / "match.jsonl").string() + q,
        };
        for (const auto &cmd : cmds) {
            if (shell(cmd) != 0)
                failures.push_back("exit status of: " + cmd);
        }
    }
    int compared = 0;
    for (const auto &entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
        if (!entry.is_regular_file())
            continue;
        const auto rel = std::filesystem::relative(entry.path(), dir / "a");
        ++compared;
        if (fixture::slurp(entry.path()) != fixture::slurp(dir / "b" / rel))
            failures.push_back(rel.string());
    }
    std::string detail = std::to_string(compared) + " files compared";
    for (const auto &f : failures)
        detail += "; differs: " + f;
    return {failures.empty() && compared >= 10, detail};
}

} // namespace

int main()
{
    int failed = 0;
    auto report = [&](int id, const char *name, const std::function<Verdict()> &fn) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception &e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << v.detail << std::endl;
        if (!v.pass)
            ++failed;
    };

    report(1, "reputation exactness", reputation_exactness);
    report(2, "reputation limits", reputation_limits);
    report(3, "scheduling oracle equivalence", scheduling_oracle);
    AbmPair abm;
    bool abm_ran = true;
    std::string abm_error;
    try {
        abm = run_abm_pair();
    } catch (const std::exception &e) {
        abm_ran = false;
        abm_error = e.what();
    }
    report(4, "ABM directional reproduction", [&] {
        return abm_ran ? abm_direction(abm) : Verdict{false, "threw: " + abm_error};
    });
    report(5, "dataset shape", [&] { return abm_ran ? dataset_shape(abm) : Verdict{false, "threw: " + abm_error}; });
    report(6, "economy conservation", economy_conservation);
    report(7, "delegation algebra", delegation_algebra);
    report(8, "slashing point value", slashing_point_value);
    report(9, "CLI determinism", cli_determinism);
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
