#pragma once

#include <map>

#include "cmx/types.hpp"

namespace cmx {

enum class Sink { treasury, burn, collators };

/// Integer token ledger. Every unit in existence was minted and sits in
/// exactly one of: an account balance, a deployment escrow, a sink, or
/// (for the staking economy) outside the ledger as bonded stake.
class Ledger {
public:
    void mint(const AccountId &to, TokenAmount amount);

    /// Remove tokens from the ledger into external custody (e.g. a stake
    /// bond). Such tokens are tracked by outside().
    void withdraw(const AccountId &from, TokenAmount amount);
    void deposit(const AccountId &to, TokenAmount amount);
    void deposit_to_sink(Sink sink, TokenAmount amount);
    void mint_to_sink(Sink sink, TokenAmount amount);
    void mint_outside(TokenAmount amount);

    void transfer(const AccountId &from, const AccountId &to, TokenAmount amount);

    /// Throws insufficient_funds without touching any balance.
    void lock(DeploymentId deployment, const AccountId &from, TokenAmount amount);
    void release(DeploymentId deployment, const AccountId &to, TokenAmount amount);

    void to_sink(const AccountId &from, Sink sink, TokenAmount amount);

    TokenAmount balance(const AccountId &account) const;
    TokenAmount locked(DeploymentId deployment) const;
    TokenAmount sink(Sink s) const noexcept;
    TokenAmount total_created() const noexcept { return _created; }
    TokenAmount outside() const noexcept { return _outside; }

    const std::map<AccountId, TokenAmount> &balances() const noexcept { return _balances; }

    /// Running-sum conservation check, O(1).
    bool conserved() const noexcept;

    /// Recomputes every sum from scratch; throws conservation_violation.
    void audit() const;

private:
    void credit_sink(Sink sink, TokenAmount amount);
    void debit(const AccountId &from, TokenAmount amount);

    std::map<AccountId, TokenAmount> _balances;
    std::map<DeploymentId, TokenAmount> _locked;
    TokenAmount _treasury = 0;
    TokenAmount _burn = 0;
    TokenAmount _collators = 0;
    TokenAmount _created = 0;
    TokenAmount _outside = 0;
    TokenAmount _sum_balances = 0;
    TokenAmount _sum_locked = 0;
};

} // namespace cmx
