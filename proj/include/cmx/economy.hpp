#pragma once

#include <optional>
#include <vector>

#include "cmx/ledger.hpp"
#include "cmx/staked_compute.hpp"

namespace cmx {

/// Stateful epoch loop around distribute_epoch. Stakes are held outside the
/// ledger's balances; after every epoch the ledger's outside custody must
/// equal the bonded stake of all unreleased commitments.
class Economy {
public:
    Economy(InflationConfig config, TokenAmount total_supply, AccountId slasher = AccountId{"slasher"});

    const InflationConfig &config() const noexcept { return _config; }
    TokenAmount total_supply() const noexcept { return _total_supply; }
    const AccountId &slasher() const noexcept { return _slasher; }
    const Ledger &ledger() const noexcept { return _ledger; }
    const std::vector<StakeCommitment> &commitments() const noexcept { return _commitments; }
    const StakeCommitment &commitment(const AccountId &committer) const;

    /// Genesis allocation.
    void fund(const AccountId &account, TokenAmount amount);

    /// Bonds the committer's own stake from its balance.
    void commit(StakeCommitment commitment);

    /// Bonds the delegator's stake unless the ratio or the per-pool cap would
    /// be broken; targets are derived from `reference` compute totals.
    std::optional<DelegationRejection> delegate(const AccountId &committer, const Delegation &delegation,
                                                const EpochState &reference);

    void begin_cooldown(const AccountId &committer, EpochIndex epoch);
    void lower_fee(const AccountId &committer, double fee);

    /// Mints the epoch's emission into payouts and sinks, charges slashing
    /// and releases commitments whose cooldown has elapsed by the end of it.
    RewardLedger run_epoch(EpochState epoch);

    TokenAmount bonded() const;

    /// Full recount; throws conservation_violation.
    void audit() const;

private:
    StakeCommitment &find(const AccountId &committer);

    InflationConfig _config;
    TokenAmount _total_supply;
    AccountId _slasher;
    Ledger _ledger;
    std::vector<StakeCommitment> _commitments;
};

/// Per-pool target weights for a set of compute totals; pools without
/// measured compute get a target of 0.
std::array<double, metric_count> target_weights(TokenAmount total_supply, const BenchmarkVector &totals);

} // namespace cmx
