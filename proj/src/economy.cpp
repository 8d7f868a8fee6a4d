#include "cmx/economy.hpp"

#include <algorithm>
#include <string>

#include "cmx/error.hpp"

namespace cmx {

std::array<double, metric_count> target_weights(TokenAmount total_supply, const BenchmarkVector &totals)
{
    std::array<double, metric_count> out{};
    for (auto m : all_metrics) {
        if (totals[m] > 0.0)
            out[static_cast<std::size_t>(m)] = target_weight(total_supply, totals[m]);
    }
    return out;
}

Economy::Economy(InflationConfig config, TokenAmount total_supply, AccountId slasher)
    : _config(config), _total_supply(total_supply), _slasher(std::move(slasher))
{
    validate(_config);
}

StakeCommitment &Economy::find(const AccountId &committer)
{
    auto it = std::find_if(_commitments.begin(), _commitments.end(), [&](const StakeCommitment &c) {
        return c.committer == committer && c.status.phase != CommitmentPhase::released;
    });
    if (it == _commitments.end())
        fail(ErrorCode::unknown_processor, "no live commitment for " + committer.value);
    return *it;
}

const StakeCommitment &Economy::commitment(const AccountId &committer) const
{
    return const_cast<Economy *>(this)->find(committer);
}

void Economy::fund(const AccountId &account, TokenAmount amount)
{
    _ledger.mint(account, amount);
}

void Economy::commit(StakeCommitment c)
{
    if (std::any_of(_commitments.begin(), _commitments.end(), [&](const StakeCommitment &x) {
            return x.committer == c.committer && x.status.phase != CommitmentPhase::released;
        }))
        fail(ErrorCode::invalid_input, c.committer.value + " already has a live commitment");
    if (c.cooldown == 0 || c.cooldown > _config.tau_max)
        fail(ErrorCode::cooldown_out_of_range, "commitment cooldown outside (0, tau_max]");
    _ledger.withdraw(c.committer, c.own_stake);
    for (const auto &d : c.delegations)
        _ledger.withdraw(d.delegator, d.stake);
    _commitments.push_back(std::move(c));
}

std::optional<DelegationRejection> Economy::delegate(const AccountId &committer, const Delegation &delegation,
                                                     const EpochState &reference)
{
    if (delegation.cooldown == 0 || delegation.cooldown > _config.tau_max)
        fail(ErrorCode::cooldown_out_of_range, "delegation cooldown outside (0, tau_max]");
    auto &c = find(committer);
    if (auto rejection = validate_delegation(c, delegation, target_weights(_total_supply, reference.totals())))
        return rejection;
    _ledger.withdraw(delegation.delegator, delegation.stake);
    c.delegations.push_back(delegation);
    return std::nullopt;
}

void Economy::begin_cooldown(const AccountId &committer, EpochIndex epoch)
{
    auto &c = find(committer);
    c = cmx::begin_cooldown(c, epoch);
}

void Economy::lower_fee(const AccountId &committer, double fee)
{
    auto &c = find(committer);
    c = with_delegation_fee(c, fee);
}

RewardLedger Economy::run_epoch(EpochState epoch)
{
    epoch.emission = _config.emission_per_epoch;
    epoch.total_supply = _total_supply;
    auto rewards = distribute_epoch(epoch, _commitments, _config);

    for (const auto &[account, amount] : rewards.credited())
        _ledger.mint(account, amount);
    _ledger.mint_to_sink(Sink::treasury, rewards.treasury);
    _ledger.mint_to_sink(Sink::collators, rewards.collators);
    _ledger.mint_outside(rewards.slash_from_rewards());

    std::size_t paid = 0;
    TokenAmount to_slasher = 0;
    TokenAmount burned = 0;
    for (auto &c : _commitments) {
        if (c.status.phase == CommitmentPhase::released)
            continue;
        const auto &cp = rewards.commitments.at(paid++);
        if (cp.committer_stake_charge > c.own_stake)
            fail(ErrorCode::conservation_violation, "slash exceeds the stake of " + c.committer.value);
        c.own_stake -= cp.committer_stake_charge;
        for (std::size_t d = 0; d < c.delegations.size(); ++d) {
            if (cp.delegator_stake_charge[d] > c.delegations[d].stake)
                fail(ErrorCode::conservation_violation, "slash exceeds a delegated stake");
            c.delegations[d].stake -= cp.delegator_stake_charge[d];
        }
        to_slasher += cp.slash.to_slasher;
        burned += cp.slash.burned;
    }
    _ledger.deposit(_slasher, to_slasher);
    _ledger.deposit_to_sink(Sink::burn, burned);

    const EpochIndex end_of_epoch = epoch.epoch + 1;
    for (auto &c : _commitments) {
        if (c.status.phase != CommitmentPhase::cooling_down || end_of_epoch - c.status.since < c.cooldown)
            continue;
        c = settle_cooldown(c, end_of_epoch);
        _ledger.deposit(c.committer, c.own_stake);
        for (const auto &d : c.delegations)
            _ledger.deposit(d.delegator, d.stake);
    }

    if (!_ledger.conserved() || _ledger.outside() != bonded())
        fail(ErrorCode::conservation_violation, "epoch " + std::to_string(epoch.epoch));
    return rewards;
}

TokenAmount Economy::bonded() const
{
    TokenAmount total = 0;
    for (const auto &c : _commitments) {
        if (c.status.phase != CommitmentPhase::released)
            total += c.total_stake();
    }
    return total;
}

void Economy::audit() const
{
    _ledger.audit();
    if (_ledger.outside() != bonded())
        fail(ErrorCode::conservation_violation, "bonded stake differs from ledger custody");
}

} // namespace cmx
