#include "cmx/orchestrator.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "cmx/error.hpp"

namespace cmx {

std::string_view to_string(Rejection r) noexcept
{
    switch (r) {
        case Rejection::inactive: return "inactive";
        case Rejection::attestation: return "attestation";
        case Rejection::security_level: return "security_level";
        case Rejection::min_reputation: return "min_reputation";
        case Rejection::price: return "price";
        case Rejection::no_feasible_delay: return "no feasible start delay";
    }
    return "?";
}

std::string_view to_string(EventKind k) noexcept
{
    switch (k) {
        case EventKind::registered: return "registered";
        case EventKind::assigned: return "assigned";
        case EventKind::cancelled: return "cancelled";
        case EventKind::success: return "success";
        case EventKind::failure: return "failure";
        case EventKind::late_report: return "late_report";
        case EventKind::missed: return "missed";
        case EventKind::done: return "done";
    }
    return "?";
}

Orchestrator::Orchestrator(OrchestratorConfig config) : _config(std::move(config)) {}

void Orchestrator::tick(TimestampMs now)
{
    if (now < _clock)
        fail(ErrorCode::clock_regression, "time " + std::to_string(now) + " precedes " + std::to_string(_clock));
    _clock = now;
}

void Orchestrator::advertise(const ProcessorAdvertisement &ad)
{
    validate(ad.benchmark);
    if (auto it = _processor_index.find(ad.processor); it != _processor_index.end()) {
        auto &known = _processors[it->second].ad;
        known.benchmark = ad.benchmark;
        known.ask_price_per_execution = ad.ask_price_per_execution;
        known.active = ad.active;
        return;
    }
    auto pos = std::lower_bound(_processors.begin(), _processors.end(), ad.processor,
                                [](const ProcessorEntry &e, const AccountId &id) { return e.ad.processor < id; });
    ProcessorEntry fresh{ad, ReputationAccumulator{.params = _config.reputation}};
    _processors.insert(pos, std::move(fresh));
    _processor_index.clear();
    for (std::size_t i = 0; i < _processors.size(); ++i)
        _processor_index.emplace(_processors[i].ad.processor, i);
}

void Orchestrator::requote(std::span<const TokenAmount> asks)
{
    if (asks.size() != _processors.size())
        fail(ErrorCode::invalid_input, "requote needs one ask per processor");
    for (std::size_t i = 0; i < asks.size(); ++i)
        _processors[i].ad.ask_price_per_execution = asks[i];
}

const ProcessorAdvertisement *Orchestrator::processor(const AccountId &id) const
{
    auto it = _processor_index.find(id);
    return it == _processor_index.end() ? nullptr : &_processors[it->second].ad;
}

std::vector<AccountId> Orchestrator::processor_ids() const
{
    std::vector<AccountId> ids;
    ids.reserve(_processors.size());
    for (const auto &p : _processors)
        ids.push_back(p.ad.processor);
    return ids;
}

Orchestrator::ProcessorEntry &Orchestrator::entry(const AccountId &processor)
{
    auto it = _processor_index.find(processor);
    if (it == _processor_index.end())
        fail(ErrorCode::unknown_processor, processor.value);
    return _processors[it->second];
}

const ReputationAccumulator &Orchestrator::reputation(const AccountId &processor) const
{
    return const_cast<Orchestrator *>(this)->entry(processor).reputation;
}

double Orchestrator::reputation_score(const AccountId &processor) const
{
    return score(reputation(processor));
}

void Orchestrator::restore_reputation(const AccountId &processor, const ReputationAccumulator &acc)
{
    if (!(acc.params == _config.reputation))
        fail(ErrorCode::invalid_input, "reputation parameters of " + processor.value + " differ from the engine's");
    entry(processor).reputation = acc;
}

Orchestrator::DeploymentRecord &Orchestrator::record(DeploymentId id)
{
    auto it = _deployments.find(id);
    if (it == _deployments.end())
        fail(ErrorCode::unknown_deployment, std::to_string(id.value));
    return it->second;
}

const Orchestrator::DeploymentRecord &Orchestrator::record(DeploymentId id) const
{
    return const_cast<Orchestrator *>(this)->record(id);
}

const DeploymentState &Orchestrator::state(DeploymentId id) const { return record(id).state; }
const DeploymentSpec &Orchestrator::spec(DeploymentId id) const { return record(id).spec; }

const Assignment *Orchestrator::assignment(DeploymentId id) const
{
    const auto &rec = record(id);
    return rec.assignment ? &*rec.assignment : nullptr;
}

DeploymentId Orchestrator::register_deployment(const DeploymentSpec &spec, TimestampMs now)
{
    tick(now);
    validate(spec);
    if (spec.reward_per_execution == 0)
        fail(ErrorCode::invalid_input, "reward_per_execution must be positive");
    if (_deployments.contains(spec.id))
        fail(ErrorCode::duplicate_deployment, std::to_string(spec.id.value));
    const TokenAmount executions = execution_count(spec.schedule, 0);
    if (spec.reward_per_execution > std::numeric_limits<TokenAmount>::max() / executions)
        fail(ErrorCode::invalid_input, "total reward overflows");
    const TokenAmount total = executions * spec.reward_per_execution;
    _ledger.lock(spec.id, spec.consumer, total);

    DeploymentRecord rec{.spec = spec, .state = state::Open{}};
    rec.grace = _config.grace.grace_for(spec.schedule);
    _deployments.emplace(spec.id, std::move(rec));
    emit({.time = now, .kind = EventKind::registered, .deployment = spec.id, .amount = total});
    return spec.id;
}

void Orchestrator::cancel(DeploymentId id, TimestampMs now)
{
    tick(now);
    auto &rec = record(id);
    if (!std::holds_alternative<state::Open>(rec.state))
        fail(ErrorCode::wrong_state, "only OPEN deployments can be cancelled");
    const TokenAmount refund = _ledger.locked(id);
    _ledger.release(id, rec.spec.consumer, refund);
    _deployments.erase(id);
    emit({.time = now, .kind = EventKind::cancelled, .deployment = id, .amount = refund});
}

std::optional<Rejection> Orchestrator::static_check(const DeploymentSpec &spec, const ProcessorEntry &p, double sc,
                                                    TimestampMs now) const
{
    if (!p.ad.active)
        return Rejection::inactive;
    if (!_attestations.is_valid(p.ad.processor, now))
        return Rejection::attestation;
    if (spec.min_security_level) {
        const auto *att = _attestations.find(p.ad.processor);
        if (att->security_level < *spec.min_security_level)
            return Rejection::security_level;
    }
    if (_config.reputation_gating && spec.min_reputation && sc < *spec.min_reputation)
        return Rejection::min_reputation;
    if (p.ad.ask_price_per_execution > spec.reward_per_execution)
        return Rejection::price;
    return std::nullopt;
}

std::vector<CandidateVerdict> Orchestrator::evaluate(DeploymentId id, TimestampMs now) const
{
    const auto &rec = record(id);
    std::vector<CandidateVerdict> out;
    out.reserve(_processors.size());
    for (const auto &p : _processors) {
        CandidateVerdict v{.processor = p.ad.processor, .reputation = score(p.reputation)};
        v.rejection = static_check(rec.spec, p, v.reputation, now);
        if (!v.rejection) {
            v.start_delay = find_start_delay(rec.spec.schedule, p.ad.calendar);
            if (!v.start_delay)
                v.rejection = Rejection::no_feasible_delay;
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::optional<Assignment> Orchestrator::match(DeploymentId id, TimestampMs now)
{
    tick(now);
    std::vector<std::size_t> all(_processors.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return match_among(record(id), all, now);
}

std::optional<Assignment> Orchestrator::match(DeploymentId id, std::span<const AccountId> candidates,
                                              TimestampMs now)
{
    tick(now);
    std::vector<std::size_t> picked;
    picked.reserve(candidates.size());
    for (const auto &c : candidates) {
        auto it = _processor_index.find(c);
        if (it == _processor_index.end())
            fail(ErrorCode::unknown_processor, c.value);
        picked.push_back(it->second);
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    return match_among(record(id), picked, now);
}

std::optional<Assignment> Orchestrator::match_among(DeploymentRecord &rec, std::span<const std::size_t> candidates,
                                                    TimestampMs now)
{
    if (!std::holds_alternative<state::Open>(rec.state))
        fail(ErrorCode::wrong_state, "deployment " + std::to_string(rec.spec.id.value) + " is " +
                                         std::string(state_name(rec.state)));
    const auto &spec = rec.spec;
    const bool gating = _config.reputation_gating;

    // Ranking: lower ask, then (with gating) higher score, then lower id.
    // Candidates are visited in id order, so an id tie never displaces.
    const ProcessorEntry *best = nullptr;
    double best_score = 0.0;
    DurationMs best_delay = 0;
    for (auto idx : candidates) {
        const auto &p = _processors[idx];
        if (!p.ad.active || p.ad.ask_price_per_execution > spec.reward_per_execution)
            continue;
        const double sc = score(p.reputation);
        if (gating && spec.min_reputation && sc < *spec.min_reputation)
            continue;
        if (best) {
            const auto ask = p.ad.ask_price_per_execution;
            const auto best_ask = best->ad.ask_price_per_execution;
            const bool better = ask < best_ask || (ask == best_ask && gating && sc > best_score);
            if (!better)
                continue;
        }
        if (static_check(spec, p, sc, now))
            continue;
        auto delay = find_start_delay(spec.schedule, p.ad.calendar);
        if (!delay)
            continue;
        best = &p;
        best_score = sc;
        best_delay = *delay;
    }
    if (!best)
        return std::nullopt;

    auto &winner = _processors[static_cast<std::size_t>(best - _processors.data())];
    Assignment a{
        .deployment = spec.id,
        .processor = winner.ad.processor,
        .start_delay = best_delay,
        .slots = enumerate_executions(spec.schedule, best_delay, spec.id),
        .agreed_price_per_execution = spec.reward_per_execution,
    };
    winner.ad.calendar.book(a.slots);
    rec.state = transition(rec.state, event::Matched{});
    rec.state = transition(rec.state, event::AcknowledgedAllSlots{});

    // escrow was sized for the zero-delay slot count; a later start may drop slots
    const TokenAmount needed = a.slots.size() * spec.reward_per_execution;
    const TokenAmount surplus = _ledger.locked(spec.id) - needed;
    if (surplus > 0)
        _ledger.release(spec.id, spec.consumer, surplus);

    rec.slots.assign(a.slots.size(), SlotStatus::pending);
    for (const auto &slot : a.slots)
        _open_windows.emplace(acceptance_window(slot, rec.grace).end, spec.id, slot.index);
    rec.assignment = a;
    emit({.time = now,
          .kind = EventKind::assigned,
          .deployment = spec.id,
          .processor = a.processor,
          .amount = a.agreed_price_per_execution,
          .reputation_after = best_score});
    return a;
}

void Orchestrator::resolve_slot(DeploymentRecord &rec, std::uint32_t index, SlotStatus status, TimestampMs at,
                                ReportAck *ack)
{
    const auto &a = *rec.assignment;
    const auto &slot = a.slots[index - 1];
    _open_windows.erase({acceptance_window(slot, rec.grace).end, rec.spec.id, index});
    rec.slots[index - 1] = status;

    auto &proc = entry(a.processor);
    const TokenAmount price = a.agreed_price_per_execution;
    const TokenAmount reward = rec.spec.reward_per_execution;
    const bool favorable = status == SlotStatus::success;
    TokenAmount paid = 0;
    TokenAmount refunded = 0;
    if (favorable) {
        paid = price;
        refunded = reward - price;
        _ledger.release(rec.spec.id, a.processor, paid);
        if (refunded > 0)
            _ledger.release(rec.spec.id, rec.spec.consumer, refunded);
        ++rec.tally.succeeded;
    } else {
        refunded = reward;
        _ledger.release(rec.spec.id, rec.spec.consumer, refunded);
        ++rec.tally.failed;
    }
    proc.reputation = record_outcome(proc.reputation, favorable, price);
    const double after = score(proc.reputation);

    EventKind kind = EventKind::success;
    switch (status) {
        case SlotStatus::success: kind = EventKind::success; break;
        case SlotStatus::failure: kind = EventKind::failure; break;
        case SlotStatus::late: kind = EventKind::late_report; break;
        case SlotStatus::missed: kind = EventKind::missed; break;
        case SlotStatus::pending: break;
    }
    emit({.time = at,
          .kind = kind,
          .deployment = rec.spec.id,
          .processor = a.processor,
          .amount = favorable ? paid : refunded,
          .reputation_after = after,
          .slot_index = index});

    ++rec.resolved;
    const bool done = rec.resolved == rec.slots.size();
    if (done) {
        rec.state = transition(rec.state, event::AllExecutionsReported{rec.tally});
        emit({.time = at, .kind = EventKind::done, .deployment = rec.spec.id, .processor = a.processor});
    }
    if (ack) {
        ack->favorable = favorable;
        ack->paid = paid;
        ack->refunded = refunded;
        ack->reputation_after = after;
        ack->deployment_done = done;
    }
}

ReportAck Orchestrator::submit_report(const ExecutionReport &report, TimestampMs now)
{
    tick(now);
    auto &rec = record(report.deployment);
    if (!std::holds_alternative<state::Assigned>(rec.state))
        fail(ErrorCode::wrong_state, "deployment " + std::to_string(report.deployment.value) + " is " +
                                         std::string(state_name(rec.state)));
    if (report.execution_index < 1 || report.execution_index > rec.slots.size())
        fail(ErrorCode::invalid_input, "execution index " + std::to_string(report.execution_index) + " out of range");
    if (rec.slots[report.execution_index - 1] != SlotStatus::pending)
        fail(ErrorCode::duplicate_report, "execution " + std::to_string(report.execution_index) + " of deployment " +
                                              std::to_string(report.deployment.value));

    // arrival time at the marketplace decides acceptance
    ReportAck ack;
    ack.timing = classify_report(rec.assignment->slots[report.execution_index - 1], now, rec.grace);
    SlotStatus status = SlotStatus::late;
    if (ack.timing == ReportTiming::in_window)
        status = report.succeeded() ? SlotStatus::success : SlotStatus::failure;
    resolve_slot(rec, report.execution_index, status, now, &ack);
    if (!_ledger.conserved())
        fail(ErrorCode::conservation_violation, "after report");
    return ack;
}

std::vector<MarketEvent> Orchestrator::advance_time(TimestampMs now)
{
    tick(now);
    const auto first = _log.size();
    while (!_open_windows.empty()) {
        const auto [closes_at, id, index] = *_open_windows.begin();
        if (closes_at > now)
            break;
        resolve_slot(record(id), index, SlotStatus::missed, closes_at, nullptr);
    }
    for (auto &p : _processors)
        p.ad.calendar.prune_before(now);
    if (!_ledger.conserved())
        fail(ErrorCode::conservation_violation, "after advancing time");
    return {_log.begin() + static_cast<std::ptrdiff_t>(first), _log.end()};
}

std::size_t Orchestrator::retire_finished()
{
    return std::erase_if(_deployments,
                         [](const auto &kv) { return std::holds_alternative<state::Done>(kv.second.state); });
}

std::vector<MarketEvent> Orchestrator::take_events()
{
    std::vector<MarketEvent> out;
    out.swap(_log);
    return out;
}

} // namespace cmx
