#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "cmx/benchmark.hpp"
#include "cmx/types.hpp"

namespace cmx {

struct InflationSplit {
    double staked_pool = 0.70;
    double treasury = 0.15;
    double base_benchmark = 0.10;
    double collators = 0.05;

    bool operator==(const InflationSplit &) const = default;
};

struct InflationConfig {
    /// Epochs are ~1.5 h long with a heartbeat every 30 minutes.
    static constexpr int heartbeats_per_epoch = 3;
    /// 3.68 years in 1.5 h epochs, floored.
    static constexpr EpochIndex default_tau_max = 21'491;
    /// 0.003424657534 % per epoch.
    static constexpr double default_max_slash_rate = 0.003424657534 / 100.0;

    TokenAmount emission_per_epoch = 1'000 * base_units_per_token;
    InflationSplit split;
    double max_slash_rate = default_max_slash_rate;
    EpochIndex tau_max = default_tau_max;
    double execution_bonus = 1.10;

    bool operator==(const InflationConfig &) const = default;
};

/// Throws config_invalid when the split does not sum to 1 or a rate is out of range.
void validate(const InflationConfig &config);

struct Delegation {
    AccountId delegator;
    TokenAmount stake = 0;
    EpochIndex cooldown = 0;

    bool operator==(const Delegation &) const = default;
};

enum class CommitmentPhase { active, cooling_down, released };

std::string_view to_string(CommitmentPhase p) noexcept;

struct CommitmentStatus {
    CommitmentPhase phase = CommitmentPhase::active;
    EpochIndex since = 0; // epoch the cooldown started, when cooling down or released

    bool operator==(const CommitmentStatus &) const = default;
};

struct StakeCommitment {
    AccountId committer;
    TokenAmount own_stake = 0;
    EpochIndex cooldown = 0;
    BenchmarkVector committed_compute;
    double delegation_fee = 0.0;
    std::vector<Delegation> delegations;
    CommitmentStatus status;

    TokenAmount delegated_stake() const noexcept;
    TokenAmount total_stake() const noexcept { return own_stake + delegated_stake(); }

    bool operator==(const StakeCommitment &) const = default;
};

/// Builds an active commitment. Committed compute may not exceed 80 % of the
/// compute measured at creation in any metric; the fee lies in [0, 1] and the
/// cooldown in (0, tau_max].
StakeCommitment create_commitment(AccountId committer, TokenAmount own_stake, EpochIndex cooldown,
                                  const BenchmarkVector &committed, const BenchmarkVector &measured,
                                  double delegation_fee, EpochIndex tau_max);

/// Fees can only go down; fee_increase otherwise.
StakeCommitment with_delegation_fee(const StakeCommitment &c, double fee);

/// stake * cooldown / tau_max, halved while cooling down.
double staking_weight(TokenAmount stake, EpochIndex cooldown, EpochIndex tau_max, bool cooling_down = false);

double committer_weight(const StakeCommitment &c, EpochIndex tau_max);
double delegation_weight(const Delegation &d, EpochIndex tau_max);
double delegators_weight(const StakeCommitment &c, EpochIndex tau_max);

/// 0.8 * S / M_p; empty_pool when the pool has no measured compute.
double target_weight(TokenAmount total_supply, double metric_total);

/// min(W_c + W_D, T_p * m_c)
double committer_score(double committer_weight, double delegators_weight, double target, double committed_metric);

/// Real-valued delegator reward W_d (1 - fee) r_c / (W_c + W_D) - slash,
/// floored at 0. zero_weight when W_c + W_D is not positive.
double delegator_reward(double delegation_weight, double fee, double commitment_reward, double committer_weight,
                        double delegators_weight, double slash);

struct RewardSplit {
    TokenAmount committer = 0;
    std::vector<TokenAmount> delegators; // same order as the commitment's delegations
};

/// Integer settlement of a commitment reward before slashing. Each delegator
/// portion is floored; the committer keeps the rest, so the parts sum to
/// `commitment_reward` exactly.
RewardSplit split_reward(const StakeCommitment &c, TokenAmount commitment_reward, EpochIndex tau_max);

struct SlashOutcome {
    std::array<double, metric_count> shortfall{};
    TokenAmount penalty = 0;
    TokenAmount to_slasher = 0;
    TokenAmount burned = 0;
    /// penalty split by stake; the committer takes the rounding remainder
    TokenAmount committer_share = 0;
    std::vector<TokenAmount> delegator_shares;
};

/// Shortfall penalty for one epoch, capped at max_slash_rate * total stake.
/// Cooling down does not reduce it; a released commitment is never slashed.
SlashOutcome slash(const StakeCommitment &c, const BenchmarkVector &current, const InflationConfig &config);

StakeCommitment begin_cooldown(const StakeCommitment &c, EpochIndex epoch);

/// Marks the commitment released once its cooldown has fully elapsed.
StakeCommitment settle_cooldown(const StakeCommitment &c, EpochIndex epoch);

enum class DelegationRejection { ratio, cap };

std::string_view to_string(DelegationRejection r) noexcept;

/// Rejects when the committer would hold less than a tenth of the total stake,
/// or the total would exceed T_p * m_c for some pool.
std::optional<DelegationRejection> validate_delegation(const StakeCommitment &c, const Delegation &incoming,
                                                       const std::array<double, metric_count> &targets);

struct EpochState {
    EpochIndex epoch = 0;
    TokenAmount emission = 0;
    TokenAmount total_supply = 0;
    /// Mean of the epoch's heartbeats per provider.
    std::map<AccountId, BenchmarkVector> current_compute;
    std::set<AccountId> executed_deployment;

    BenchmarkVector totals() const;
};

struct Heartbeat {
    AccountId provider;
    BenchmarkVector measured;
};

/// Mean of the received heartbeats per provider.
std::map<AccountId, BenchmarkVector> current_compute_from(std::span<const Heartbeat> heartbeats);

struct PoolShare {
    AccountId account;
    Metric pool = Metric::cpu_single;
    double theta = 0.0; // committer score, or bonus-weighted measurement for the base pool
    TokenAmount amount = 0;
};

struct CommitmentPayout {
    AccountId committer;
    TokenAmount gross = 0; // r_c, summed over the four pools
    std::vector<AccountId> delegators;
    RewardSplit split;
    SlashOutcome slash;
    TokenAmount committer_net = 0;
    std::vector<TokenAmount> delegator_net;
    /// Slash not covered by this epoch's rewards, charged to stake.
    TokenAmount committer_stake_charge = 0;
    std::vector<TokenAmount> delegator_stake_charge;
};

struct RewardLedger {
    EpochIndex epoch = 0;
    TokenAmount emission = 0;
    std::array<TokenAmount, metric_count> staked_tranche{};
    std::array<TokenAmount, metric_count> base_tranche{};
    std::vector<PoolShare> staked_shares;
    std::vector<PoolShare> base_shares;
    std::vector<CommitmentPayout> commitments;
    /// Base-pool rewards per provider, summed over pools.
    std::map<AccountId, TokenAmount> base_rewards;
    TokenAmount treasury = 0; // split share plus every residue and empty-pool carry
    TokenAmount carried_to_treasury = 0;
    TokenAmount collators = 0;

    /// Emission routed to each account (net of slashing).
    std::map<AccountId, TokenAmount> credited() const;
    /// Slash paid out of this epoch's rewards.
    TokenAmount slash_from_rewards() const;
    TokenAmount slash_from_stake() const;
    TokenAmount slash_total() const;
    TokenAmount paid_out() const;
};

/// Pure epoch settlement: staked pool, base pool, treasury and collator
/// shares, execution bonus, delegation split and slashing. Released
/// commitments take no part.
RewardLedger distribute_epoch(const EpochState &epoch, std::span<const StakeCommitment> commitments,
                              const InflationConfig &config);

} // namespace cmx
