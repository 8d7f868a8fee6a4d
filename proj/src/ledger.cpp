#include "cmx/ledger.hpp"

#include <string>

#include "cmx/error.hpp"

namespace cmx {

void Ledger::mint(const AccountId &to, TokenAmount amount)
{
    _balances[to] += amount;
    _sum_balances += amount;
    _created += amount;
}

void Ledger::debit(const AccountId &from, TokenAmount amount)
{
    auto it = _balances.find(from);
    const TokenAmount have = it == _balances.end() ? 0 : it->second;
    if (have < amount)
        fail(ErrorCode::insufficient_funds, from.value + " holds " + std::to_string(have) + ", needs " +
                                                std::to_string(amount));
    if (amount == 0)
        return;
    it->second -= amount;
    _sum_balances -= amount;
}

void Ledger::withdraw(const AccountId &from, TokenAmount amount)
{
    debit(from, amount);
    _outside += amount;
}

void Ledger::deposit(const AccountId &to, TokenAmount amount)
{
    if (_outside < amount)
        fail(ErrorCode::conservation_violation, "deposit exceeds tokens held outside the ledger");
    _outside -= amount;
    _balances[to] += amount;
    _sum_balances += amount;
}

void Ledger::deposit_to_sink(Sink s, TokenAmount amount)
{
    if (_outside < amount)
        fail(ErrorCode::conservation_violation, "deposit exceeds tokens held outside the ledger");
    _outside -= amount;
    credit_sink(s, amount);
}

void Ledger::mint_to_sink(Sink s, TokenAmount amount)
{
    credit_sink(s, amount);
    _created += amount;
}

void Ledger::mint_outside(TokenAmount amount)
{
    _outside += amount;
    _created += amount;
}

void Ledger::transfer(const AccountId &from, const AccountId &to, TokenAmount amount)
{
    debit(from, amount);
    _balances[to] += amount;
    _sum_balances += amount;
}

void Ledger::lock(DeploymentId deployment, const AccountId &from, TokenAmount amount)
{
    debit(from, amount);
    _locked[deployment] += amount;
    _sum_locked += amount;
}

void Ledger::release(DeploymentId deployment, const AccountId &to, TokenAmount amount)
{
    auto it = _locked.find(deployment);
    if (it == _locked.end() || it->second < amount)
        fail(ErrorCode::conservation_violation,
             "release of " + std::to_string(amount) + " exceeds escrow of deployment " + std::to_string(deployment.value));
    it->second -= amount;
    _sum_locked -= amount;
    if (it->second == 0)
        _locked.erase(it);
    _balances[to] += amount;
    _sum_balances += amount;
}

void Ledger::to_sink(const AccountId &from, Sink s, TokenAmount amount)
{
    debit(from, amount);
    credit_sink(s, amount);
}

void Ledger::credit_sink(Sink s, TokenAmount amount)
{
    switch (s) {
        case Sink::treasury: _treasury += amount; break;
        case Sink::burn: _burn += amount; break;
        case Sink::collators: _collators += amount; break;
    }
}

TokenAmount Ledger::balance(const AccountId &account) const
{
    auto it = _balances.find(account);
    return it == _balances.end() ? 0 : it->second;
}

TokenAmount Ledger::locked(DeploymentId deployment) const
{
    auto it = _locked.find(deployment);
    return it == _locked.end() ? 0 : it->second;
}

TokenAmount Ledger::sink(Sink s) const noexcept
{
    switch (s) {
        case Sink::treasury: return _treasury;
        case Sink::burn: return _burn;
        case Sink::collators: return _collators;
    }
    return 0;
}

bool Ledger::conserved() const noexcept
{
    return _created == _sum_balances + _sum_locked + _treasury + _burn + _collators + _outside;
}

void Ledger::audit() const
{
    TokenAmount balances = 0;
    for (const auto &[_, v] : _balances)
        balances += v;
    TokenAmount locked = 0;
    for (const auto &[_, v] : _locked)
        locked += v;
    if (balances != _sum_balances || locked != _sum_locked || !conserved())
        fail(ErrorCode::conservation_violation,
             "created " + std::to_string(_created) + " != balances " + std::to_string(balances) + " + locked " +
                 std::to_string(locked) + " + sinks " + std::to_string(_treasury + _burn + _collators) +
                 " + outside " + std::to_string(_outside));
}

} // namespace cmx
