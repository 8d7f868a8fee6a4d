#include "cmx/staked_compute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmx/error.hpp"

namespace cmx {

namespace {

TokenAmount floor_fraction(TokenAmount total, long double fraction)
{
    if (fraction <= 0.0L)
        return 0;
    const long double v = std::floor(static_cast<long double>(total) * fraction);
    return v >= static_cast<long double>(total) ? total : static_cast<TokenAmount>(v);
}

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

std::string_view to_string(CommitmentPhase p) noexcept
{
    switch (p) {
        case CommitmentPhase::active: return "active";
        case CommitmentPhase::cooling_down: return "cooling_down";
        case CommitmentPhase::released: return "released";
    }
    return "?";
}

std::string_view to_string(DelegationRejection r) noexcept
{
    return r == DelegationRejection::ratio ? "ratio" : "cap";
}

void validate(const InflationConfig &c)
{
    const auto &s = c.split;
    for (double f : {s.staked_pool, s.treasury, s.base_benchmark, s.collators}) {
        if (!in_unit_interval(f))
            fail(ErrorCode::config_invalid, "inflation split fractions must lie in [0,1]");
    }
    if (std::abs(s.staked_pool + s.treasury + s.base_benchmark + s.collators - 1.0) > 1e-12)
        fail(ErrorCode::config_invalid, "inflation split must sum to 1");
    if (!in_unit_interval(c.max_slash_rate))
        fail(ErrorCode::config_invalid, "max_slash_rate must lie in [0,1]");
    if (c.tau_max == 0)
        fail(ErrorCode::config_invalid, "tau_max must be positive");
    if (!(c.execution_bonus >= 1.0) || !std::isfinite(c.execution_bonus))
        fail(ErrorCode::config_invalid, "execution_bonus must be >= 1");
}

TokenAmount StakeCommitment::delegated_stake() const noexcept
{
    TokenAmount total = 0;
    for (const auto &d : delegations)
        total += d.stake;
    return total;
}

StakeCommitment create_commitment(AccountId committer, TokenAmount own_stake, EpochIndex cooldown,
                                  const BenchmarkVector &committed, const BenchmarkVector &measured,
                                  double delegation_fee, EpochIndex tau_max)
{
    validate(committed);
    validate(measured);
    if (cooldown == 0 || cooldown > tau_max)
        fail(ErrorCode::cooldown_out_of_range, "cooldown must be in (0, tau_max]");
    if (!in_unit_interval(delegation_fee))
        fail(ErrorCode::invalid_input, "delegation fee must be in [0,1]");
    if (own_stake == 0)
        fail(ErrorCode::invalid_input, "own stake must be positive");
    for (auto m : all_metrics) {
        if (committed[m] > 0.8 * measured[m])
            fail(ErrorCode::invalid_input, "committed " + std::string(metric_name(m)) +
                                               " exceeds 80% of the measured compute");
    }
    return StakeCommitment{
        .committer = std::move(committer),
        .own_stake = own_stake,
        .cooldown = cooldown,
        .committed_compute = committed,
        .delegation_fee = delegation_fee,
    };
}

StakeCommitment with_delegation_fee(const StakeCommitment &c, double fee)
{
    if (!in_unit_interval(fee))
        fail(ErrorCode::invalid_input, "delegation fee must be in [0,1]");
    if (fee > c.delegation_fee)
        fail(ErrorCode::fee_increase, "delegation fee can only decrease");
    auto next = c;
    next.delegation_fee = fee;
    return next;
}

double staking_weight(TokenAmount stake, EpochIndex cooldown, EpochIndex tau_max, bool cooling_down)
{
    if (cooldown == 0 || cooldown > tau_max)
        fail(ErrorCode::cooldown_out_of_range,
             "cooldown " + std::to_string(cooldown) + " outside (0, " + std::to_string(tau_max) + "]");
    const double w = static_cast<double>(stake) * static_cast<double>(cooldown) / static_cast<double>(tau_max);
    return cooling_down ? 0.5 * w : w;
}

double committer_weight(const StakeCommitment &c, EpochIndex tau_max)
{
    return staking_weight(c.own_stake, c.cooldown, tau_max, c.status.phase == CommitmentPhase::cooling_down);
}

double delegation_weight(const Delegation &d, EpochIndex tau_max)
{
    return staking_weight(d.stake, d.cooldown, tau_max);
}

double delegators_weight(const StakeCommitment &c, EpochIndex tau_max)
{
    double total = 0.0;
    for (const auto &d : c.delegations)
        total += delegation_weight(d, tau_max);
    return total;
}

double target_weight(TokenAmount total_supply, double metric_total)
{
    if (!(metric_total > 0.0))
        fail(ErrorCode::empty_pool, "no measured compute in pool");
    return 0.8 * static_cast<double>(total_supply) / metric_total;
}

double committer_score(double committer_weight, double delegators_weight, double target, double committed_metric)
{
    return std::min(committer_weight + delegators_weight, target * committed_metric);
}

double delegator_reward(double delegation_weight, double fee, double commitment_reward, double committer_weight,
                        double delegators_weight, double slash)
{
    const double total = committer_weight + delegators_weight;
    if (!(total > 0.0))
        fail(ErrorCode::zero_weight, "commitment has no weight");
    return std::max(0.0, delegation_weight * (1.0 - fee) * commitment_reward / total - slash);
}

RewardSplit split_reward(const StakeCommitment &c, TokenAmount commitment_reward, EpochIndex tau_max)
{
    RewardSplit out;
    out.delegators.assign(c.delegations.size(), 0);
    out.committer = commitment_reward;
    if (commitment_reward == 0 || c.delegations.empty())
        return out;
    const long double wc = committer_weight(c, tau_max);
    long double wd_total = 0.0L;
    for (const auto &d : c.delegations)
        wd_total += delegation_weight(d, tau_max);
    if (!(wc + wd_total > 0.0L))
        fail(ErrorCode::zero_weight, "commitment of " + c.committer.value + " has no weight");
    TokenAmount given = 0;
    for (std::size_t i = 0; i < c.delegations.size(); ++i) {
        const long double frac =
            delegation_weight(c.delegations[i], tau_max) * (1.0L - c.delegation_fee) / (wc + wd_total);
        out.delegators[i] = std::min(floor_fraction(commitment_reward, frac), commitment_reward - given);
        given += out.delegators[i];
    }
    out.committer = commitment_reward - given;
    return out;
}

SlashOutcome slash(const StakeCommitment &c, const BenchmarkVector &current, const InflationConfig &config)
{
    SlashOutcome out;
    out.delegator_shares.assign(c.delegations.size(), 0);
    if (c.status.phase == CommitmentPhase::released)
        return out;
    long double weighted = 0.0L;
    for (auto m : all_metrics) {
        const double committed = c.committed_compute[m];
        const double delta = committed > 0.0 ? std::max(0.0, (committed - current[m]) / committed) : 0.0;
        out.shortfall[static_cast<std::size_t>(m)] = delta;
        weighted += normalized_metric_weight(m) * static_cast<long double>(delta);
    }
    const TokenAmount stake = c.total_stake();
    const long double rate = config.max_slash_rate;
    const long double raw = static_cast<long double>(stake) * rate * weighted;
    const long double cap = static_cast<long double>(stake) * rate;
    out.penalty = static_cast<TokenAmount>(std::floor(std::min(raw, cap)));
    out.to_slasher = out.penalty / 10;
    out.burned = out.penalty - out.to_slasher;

    TokenAmount assigned = 0;
    for (std::size_t i = 0; i < c.delegations.size() && stake > 0; ++i) {
        const auto share = static_cast<TokenAmount>(static_cast<unsigned __int128>(out.penalty) *
                                                    c.delegations[i].stake / stake);
        out.delegator_shares[i] = share;
        assigned += share;
    }
    out.committer_share = out.penalty - assigned;
    return out;
}

StakeCommitment begin_cooldown(const StakeCommitment &c, EpochIndex epoch)
{
    if (c.status.phase != CommitmentPhase::active)
        fail(ErrorCode::wrong_status, "commitment of " + c.committer.value + " is " +
                                          std::string(to_string(c.status.phase)));
    auto next = c;
    next.status = {CommitmentPhase::cooling_down, epoch};
    return next;
}

StakeCommitment settle_cooldown(const StakeCommitment &c, EpochIndex epoch)
{
    if (c.status.phase != CommitmentPhase::cooling_down)
        fail(ErrorCode::wrong_status, "commitment of " + c.committer.value + " is not cooling down");
    if (epoch < c.status.since || epoch - c.status.since < c.cooldown)
        fail(ErrorCode::cooldown_not_elapsed, "cooldown of " + std::to_string(c.cooldown) + " epochs has not elapsed");
    auto next = c;
    next.status.phase = CommitmentPhase::released;
    return next;
}

std::optional<DelegationRejection> validate_delegation(const StakeCommitment &c, const Delegation &incoming,
                                                       const std::array<double, metric_count> &targets)
{
    const TokenAmount total_after = c.total_stake() + incoming.stake;
    if (static_cast<unsigned __int128>(c.own_stake) * 10 < total_after)
        return DelegationRejection::ratio;
    for (auto m : all_metrics) {
        const double cap = targets[static_cast<std::size_t>(m)] * c.committed_compute[m];
        if (static_cast<double>(total_after) > cap)
            return DelegationRejection::cap;
    }
    return std::nullopt;
}

BenchmarkVector EpochState::totals() const
{
    BenchmarkVector t;
    for (const auto &[_, v] : current_compute) {
        for (auto m : all_metrics)
            t[m] += v[m];
    }
    return t;
}

std::map<AccountId, BenchmarkVector> current_compute_from(std::span<const Heartbeat> heartbeats)
{
    std::map<AccountId, std::pair<BenchmarkVector, int>> sums;
    for (const auto &hb : heartbeats) {
        auto &[sum, count] = sums[hb.provider];
        for (auto m : all_metrics)
            sum[m] += hb.measured[m];
        ++count;
    }
    std::map<AccountId, BenchmarkVector> out;
    for (auto &[id, acc] : sums)
        out.emplace(id, scaled(acc.first, 1.0 / acc.second));
    return out;
}

std::map<AccountId, TokenAmount> RewardLedger::credited() const
{
    std::map<AccountId, TokenAmount> out = base_rewards;
    for (const auto &cp : commitments) {
        out[cp.committer] += cp.committer_net;
        for (std::size_t d = 0; d < cp.delegators.size(); ++d)
            out[cp.delegators[d]] += cp.delegator_net[d];
    }
    return out;
}

TokenAmount RewardLedger::slash_from_rewards() const
{
    return slash_total() - slash_from_stake();
}

TokenAmount RewardLedger::slash_from_stake() const
{
    TokenAmount total = 0;
    for (const auto &cp : commitments) {
        total += cp.committer_stake_charge;
        for (auto x : cp.delegator_stake_charge)
            total += x;
    }
    return total;
}

TokenAmount RewardLedger::slash_total() const
{
    TokenAmount total = 0;
    for (const auto &cp : commitments)
        total += cp.slash.penalty;
    return total;
}

TokenAmount RewardLedger::paid_out() const
{
    TokenAmount total = 0;
    for (const auto &[_, v] : base_rewards)
        total += v;
    for (const auto &cp : commitments) {
        total += cp.committer_net;
        for (auto x : cp.delegator_net)
            total += x;
    }
    return total;
}

namespace {

/// Pro-rata integer shares of `pot` by `weights`; returns the undistributed residue.
TokenAmount share_out(TokenAmount pot, const std::vector<long double> &weights, std::vector<TokenAmount> &shares)
{
    shares.assign(weights.size(), 0);
    const long double total = std::accumulate(weights.begin(), weights.end(), 0.0L);
    TokenAmount given = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        shares[i] = std::min(floor_fraction(pot, weights[i] / total), pot - given);
        given += shares[i];
    }
    return pot - given;
}

} // namespace

RewardLedger distribute_epoch(const EpochState &epoch, std::span<const StakeCommitment> commitments,
                              const InflationConfig &config)
{
    validate(config);
    RewardLedger out;
    out.epoch = epoch.epoch;
    out.emission = epoch.emission;

    const TokenAmount emission = epoch.emission;
    const TokenAmount staked = floor_fraction(emission, config.split.staked_pool);
    const TokenAmount base = floor_fraction(emission, config.split.base_benchmark);
    const TokenAmount collators = floor_fraction(emission, config.split.collators);
    out.collators = collators;
    out.treasury = emission - staked - base - collators;

    auto bonus = [&](const AccountId &a) {
        return epoch.executed_deployment.contains(a) ? config.execution_bonus : 1.0;
    };
    const BenchmarkVector totals = epoch.totals();

    std::vector<const StakeCommitment *> live;
    for (const auto &c : commitments) {
        if (c.status.phase != CommitmentPhase::released)
            live.push_back(&c);
    }
    std::vector<double> own_weight(live.size());
    std::vector<double> delegated_weight(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
        own_weight[i] = committer_weight(*live[i], config.tau_max);
        delegated_weight[i] = delegators_weight(*live[i], config.tau_max);
    }
    std::vector<TokenAmount> gross(live.size(), 0);

    TokenAmount carry = 0;
    TokenAmount staked_given = 0;
    TokenAmount base_given = 0;
    std::vector<TokenAmount> shares;
    for (auto m : all_metrics) {
        const auto p = static_cast<std::size_t>(m);
        const TokenAmount pot = floor_fraction(staked, normalized_metric_weight(m));
        out.staked_tranche[p] = pot;
        staked_given += pot;
        if (totals[m] > 0.0 && !live.empty()) {
            const double target = target_weight(epoch.total_supply, totals[m]);
            std::vector<long double> theta(live.size());
            long double theta_sum = 0.0L;
            for (std::size_t i = 0; i < live.size(); ++i) {
                const double committed = live[i]->committed_compute[m] * bonus(live[i]->committer);
                theta[i] = committer_score(own_weight[i], delegated_weight[i], target, committed);
                theta_sum += theta[i];
            }
            if (theta_sum > 0.0L) {
                carry += share_out(pot, theta, shares);
                for (std::size_t i = 0; i < live.size(); ++i) {
                    gross[i] += shares[i];
                    out.staked_shares.push_back(
                        {live[i]->committer, m, static_cast<double>(theta[i]), shares[i]});
                }
            } else {
                carry += pot;
            }
        } else {
            carry += pot;
        }

        const TokenAmount base_pot = floor_fraction(base, normalized_metric_weight(m));
        out.base_tranche[p] = base_pot;
        base_given += base_pot;
        std::vector<long double> measure;
        std::vector<const AccountId *> who;
        for (const auto &[id, v] : epoch.current_compute) {
            measure.push_back(static_cast<long double>(v[m]) * bonus(id));
            who.push_back(&id);
        }
        const long double measure_sum = std::accumulate(measure.begin(), measure.end(), 0.0L);
        if (measure_sum > 0.0L) {
            carry += share_out(base_pot, measure, shares);
            for (std::size_t i = 0; i < who.size(); ++i) {
                out.base_rewards[*who[i]] += shares[i];
                out.base_shares.push_back({*who[i], m, static_cast<double>(measure[i]), shares[i]});
            }
        } else {
            carry += base_pot;
        }
    }
    carry += (staked - staked_given) + (base - base_given);
    out.carried_to_treasury = carry;
    out.treasury += carry;

    static const BenchmarkVector nothing{};
    for (std::size_t i = 0; i < live.size(); ++i) {
        const auto &c = *live[i];
        CommitmentPayout cp{.committer = c.committer, .gross = gross[i]};
        for (const auto &d : c.delegations)
            cp.delegators.push_back(d.delegator);
        cp.split = split_reward(c, gross[i], config.tau_max);
        auto cur = epoch.current_compute.find(c.committer);
        cp.slash = slash(c, cur == epoch.current_compute.end() ? nothing : cur->second, config);

        // slashing is charged to the epoch's reward first, then to stake
        auto settle = [](TokenAmount reward, TokenAmount penalty, TokenAmount &net, TokenAmount &charge) {
            net = reward > penalty ? reward - penalty : 0;
            charge = penalty > reward ? penalty - reward : 0;
        };
        settle(cp.split.committer, cp.slash.committer_share, cp.committer_net, cp.committer_stake_charge);
        cp.delegator_net.resize(c.delegations.size());
        cp.delegator_stake_charge.resize(c.delegations.size());
        for (std::size_t d = 0; d < c.delegations.size(); ++d)
            settle(cp.split.delegators[d], cp.slash.delegator_shares[d], cp.delegator_net[d],
                   cp.delegator_stake_charge[d]);
        out.commitments.push_back(std::move(cp));
    }
    return out;
}

} // namespace cmx
