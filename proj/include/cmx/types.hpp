#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace cmx {

/// Simulation clock, integer milliseconds since the simulation's epoch 0.
using TimestampMs = std::int64_t;
using DurationMs = std::int64_t;

/// Ledger amounts in integer base units.
using TokenAmount = std::uint64_t;

/// Base units per whole token. Scenario files quote human-scale token values
/// (rewards of ~100, stakes of ~10^6) and these are scaled on load.
inline constexpr TokenAmount base_units_per_token = 1'000'000;

using EpochIndex = std::uint64_t;

struct AccountId {
    std::string value;

    AccountId() = default;
    explicit AccountId(std::string v) : value(std::move(v)) {}

    auto operator<=>(const AccountId &) const = default;
    bool operator==(const AccountId &) const = default;
};

struct DeploymentId {
    std::uint64_t value = 0;

    auto operator<=>(const DeploymentId &) const = default;
    bool operator==(const DeploymentId &) const = default;
};

} // namespace cmx

template<>
struct std::hash<cmx::AccountId> {
    std::size_t operator()(const cmx::AccountId &a) const noexcept { return std::hash<std::string>{}(a.value); }
};

template<>
struct std::hash<cmx::DeploymentId> {
    std::size_t operator()(const cmx::DeploymentId &d) const noexcept { return std::hash<std::uint64_t>{}(d.value); }
};
