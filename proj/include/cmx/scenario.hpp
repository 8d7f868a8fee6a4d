#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmx/abm.hpp"
#include "cmx/attestation.hpp"
#include "cmx/economy.hpp"
#include "cmx/json_io.hpp"
#include "cmx/staked_compute.hpp"

namespace cmx {

/// A compute provider of the economy and the compute it measures while healthy.
struct ProviderSpec {
    AccountId id;
    BenchmarkVector measured;

    bool operator==(const ProviderSpec &) const = default;
};

struct CommitmentSpec {
    AccountId committer;
    TokenAmount own_stake = 0; // base units
    EpochIndex cooldown = 0;
    BenchmarkVector committed;
    double delegation_fee = 0.0;
    std::vector<Delegation> delegations;
    /// Epoch at whose start the committer announces its cooldown.
    std::optional<EpochIndex> cooldown_start;

    bool operator==(const CommitmentSpec &) const = default;
};

/// Over epochs [from, to) the provider measures `factor` times its compute.
struct ShortfallSpec {
    AccountId provider;
    EpochIndex from = 0;
    EpochIndex to = 0;
    double factor = 0.0;

    bool operator==(const ShortfallSpec &) const = default;
};

/// Over epochs [from, to) the provider executed at least one deployment.
struct ExecutionSpec {
    AccountId provider;
    EpochIndex from = 0;
    EpochIndex to = 0;

    bool operator==(const ExecutionSpec &) const = default;
};

struct EconomyScenario {
    InflationConfig inflation;
    TokenAmount total_supply = 1'000'000'000 * base_units_per_token;
    AccountId slasher{"slasher"};
    EpochIndex epochs = 10;
    std::map<AccountId, TokenAmount> accounts; // genesis balances, base units
    std::vector<ProviderSpec> providers;
    std::vector<CommitmentSpec> commitments;
    std::vector<ShortfallSpec> shortfalls;
    std::vector<ExecutionSpec> executions;

    bool operator==(const EconomyScenario &) const = default;
};

struct Scenario {
    SimConfig sim;
    EconomyScenario economy;
    std::vector<AttestationRecord> attestations;

    bool operator==(const Scenario &) const = default;
};

/// Parses scenario text; a syntax error reports line and column, a semantic
/// one the dotted field path. Missing sections and fields take defaults.
Scenario parse_scenario(const std::string &text);
Scenario load_scenario(const std::filesystem::path &path);
Scenario scenario_from_json(const Json &j);

/// Every field with its value, defaults included.
Json to_json(const Scenario &s);

/// Compact dump of to_json with sorted keys.
std::string canonical_text(const Scenario &s);

/// Lower-case hex SHA-256 of canonical_text.
std::string config_hash(const Scenario &s);

std::string sha256_hex(std::string_view data);

struct DelegationOutcome {
    AccountId committer;
    AccountId delegator;
    std::optional<DelegationRejection> rejection;
};

struct EconomyRun {
    Economy economy;
    std::vector<DelegationOutcome> delegations;
    std::vector<RewardLedger> epochs;
};

/// Genesis funding, commitments, delegations, then `epochs` settled epochs.
EconomyRun run_economy(const EconomyScenario &scenario, std::optional<EpochIndex> epochs = std::nullopt);

/// The epoch's state as the scenario describes it: the heartbeats of every
/// provider (scaled by active shortfalls) and the execution set.
EpochState epoch_state(const EconomyScenario &scenario, EpochIndex epoch);

} // namespace cmx
