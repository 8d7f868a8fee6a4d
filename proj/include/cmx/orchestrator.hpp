#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cmx/attestation.hpp"
#include "cmx/benchmark.hpp"
#include "cmx/domain.hpp"
#include "cmx/ledger.hpp"
#include "cmx/reputation.hpp"
#include "cmx/scheduler.hpp"

namespace cmx {

struct ProcessorAdvertisement {
    AccountId processor;
    BenchmarkVector benchmark;
    TokenAmount ask_price_per_execution = 0;
    ProcessorCalendar calendar;
    bool active = true;

    bool operator==(const ProcessorAdvertisement &) const = default;
};

struct Assignment {
    DeploymentId deployment;
    AccountId processor;
    DurationMs start_delay = 0;
    std::vector<ExecutionSlot> slots;
    TokenAmount agreed_price_per_execution = 0;

    bool operator==(const Assignment &) const = default;
};

/// Why a candidate could not take a deployment, in evaluation order.
enum class Rejection { inactive, attestation, security_level, min_reputation, price, no_feasible_delay };

std::string_view to_string(Rejection r) noexcept;

struct CandidateVerdict {
    AccountId processor;
    std::optional<Rejection> rejection;
    double reputation = 0.0;
    std::optional<DurationMs> start_delay;
};

enum class EventKind { registered, assigned, cancelled, success, failure, late_report, missed, done };

std::string_view to_string(EventKind k) noexcept;

/// One line of the market event log.
struct MarketEvent {
    TimestampMs time = 0;
    EventKind kind = EventKind::registered;
    DeploymentId deployment;
    std::optional<AccountId> processor;
    TokenAmount amount = 0;
    std::optional<double> reputation_after;
    std::uint32_t slot_index = 0; // 0 for deployment-level events

    bool operator==(const MarketEvent &) const = default;
};

struct ReportAck {
    ReportTiming timing = ReportTiming::in_window;
    bool favorable = false;
    TokenAmount paid = 0;
    TokenAmount refunded = 0;
    double reputation_after = 0.0;
    bool deployment_done = false;
};

struct OrchestratorConfig {
    ReputationParams reputation;
    GracePolicy grace;
    /// When false, minimum-reputation constraints are ignored and scores play
    /// no part in candidate ranking. Reputation is still tracked.
    bool reputation_gating = true;
};

/// The marketplace: deployments, processors, escrow and reputation, driven
/// by a single command loop. Every command takes the current simulation time,
/// which must never go backwards.
class Orchestrator {
public:
    explicit Orchestrator(OrchestratorConfig config = {});

    AttestationRegistry &attestations() noexcept { return _attestations; }
    const AttestationRegistry &attestations() const noexcept { return _attestations; }
    Ledger &ledger() noexcept { return _ledger; }
    const Ledger &ledger() const noexcept { return _ledger; }
    const OrchestratorConfig &config() const noexcept { return _config; }
    TimestampMs clock() const noexcept { return _clock; }

    /// Adds a processor, or refreshes ask, benchmark and active flag of a known
    /// one. A known processor keeps its orchestrator-managed calendar.
    void advertise(const ProcessorAdvertisement &ad);

    /// Replaces every ask at once; `asks` follows processor_ids() order.
    void requote(std::span<const TokenAmount> asks);

    const ProcessorAdvertisement *processor(const AccountId &id) const;
    std::vector<AccountId> processor_ids() const;

    const ReputationAccumulator &reputation(const AccountId &processor) const;
    double reputation_score(const AccountId &processor) const;
    /// Restores persisted reputation state; the parameters must match.
    void restore_reputation(const AccountId &processor, const ReputationAccumulator &acc);

    /// Locks K * reward where K is the slot count at zero delay; state OPEN.
    DeploymentId register_deployment(const DeploymentSpec &spec, TimestampMs now);

    /// Withdraws an OPEN deployment and refunds its escrow.
    void cancel(DeploymentId id, TimestampMs now);

    /// Picks the lowest ask among qualifying processors, ties broken by higher
    /// reputation and then account id. On success the deployment is ASSIGNED
    /// and the slots are booked on the winner's calendar.
    std::optional<Assignment> match(DeploymentId id, TimestampMs now);
    std::optional<Assignment> match(DeploymentId id, std::span<const AccountId> candidates, TimestampMs now);

    /// Per-candidate eligibility, for diagnostics. Does not mutate anything.
    std::vector<CandidateVerdict> evaluate(DeploymentId id, TimestampMs now) const;

    ReportAck submit_report(const ExecutionReport &report, TimestampMs now);

    /// Closes acceptance windows that ended at or before `now`. Unreported
    /// slots become misses (unfavorable, refunded). Events are ordered by
    /// (window end, deployment id, slot index).
    std::vector<MarketEvent> advance_time(TimestampMs now);

    const DeploymentState &state(DeploymentId id) const;
    const DeploymentSpec &spec(DeploymentId id) const;
    const Assignment *assignment(DeploymentId id) const;
    bool knows(DeploymentId id) const { return _deployments.contains(id); }

    /// Forgets DONE deployments. Their events stay in the log.
    std::size_t retire_finished();

    const std::vector<MarketEvent> &event_log() const noexcept { return _log; }
    std::vector<MarketEvent> take_events();

private:
    enum class SlotStatus : std::uint8_t { pending, success, failure, late, missed };

    struct ProcessorEntry {
        ProcessorAdvertisement ad;
        ReputationAccumulator reputation;
    };

    struct DeploymentRecord {
        DeploymentSpec spec;
        DeploymentState state;
        std::optional<Assignment> assignment;
        std::vector<SlotStatus> slots;
        std::uint32_t resolved = 0;
        OutcomeTally tally;
        DurationMs grace = 0;
    };

    void tick(TimestampMs now);
    DeploymentRecord &record(DeploymentId id);
    const DeploymentRecord &record(DeploymentId id) const;
    ProcessorEntry &entry(const AccountId &processor);
    std::optional<Rejection> static_check(const DeploymentSpec &spec, const ProcessorEntry &p, double score,
                                          TimestampMs now) const;
    std::optional<Assignment> match_among(DeploymentRecord &rec, std::span<const std::size_t> candidates,
                                          TimestampMs now);
    void resolve_slot(DeploymentRecord &rec, std::uint32_t index, SlotStatus status, TimestampMs at,
                      ReportAck *ack);
    void emit(MarketEvent ev) { _log.push_back(std::move(ev)); }

    OrchestratorConfig _config;
    AttestationRegistry _attestations;
    Ledger _ledger;
    TimestampMs _clock = 0;
    std::vector<ProcessorEntry> _processors; // sorted by account id
    std::unordered_map<AccountId, std::size_t> _processor_index;
    std::map<DeploymentId, DeploymentRecord> _deployments;
    std::set<std::tuple<TimestampMs, DeploymentId, std::uint32_t>> _open_windows;
    std::vector<MarketEvent> _log;
};

} // namespace cmx
