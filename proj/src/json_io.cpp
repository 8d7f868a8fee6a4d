#include "cmx/json_io.hpp"

#include <cmath>

namespace cmx {

ObjectReader::ObjectReader(const Json &json, std::string path) : _json(json), _path(std::move(path))
{
    require_object(_json, _path);
}

bool ObjectReader::has(std::string_view key) const
{
    return _json.contains(std::string(key));
}

const Json &ObjectReader::at(std::string_view key)
{
    mark(key);
    auto it = _json.find(std::string(key));
    if (it == _json.end())
        fail(ErrorCode::config_invalid, field(key) + ": missing required field");
    return *it;
}

std::string ObjectReader::field(std::string_view key) const
{
    return _path.empty() ? std::string(key) : _path + "." + std::string(key);
}

void ObjectReader::finish() const
{
    for (const auto &[key, _] : _json.items()) {
        if (!_seen.contains(key))
            fail(ErrorCode::config_invalid, field(key) + ": unknown key");
    }
}

void require_object(const Json &j, const std::string &path)
{
    if (!j.is_object())
        fail(ErrorCode::config_invalid, path + ": expected an object");
}

namespace {

template<class T, class F>
std::vector<T> read_array(const Json &j, const std::string &path, F &&read_one)
{
    if (!j.is_array())
        fail(ErrorCode::config_invalid, path + ": expected an array");
    std::vector<T> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(read_one(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// Domain validation errors are re-labelled with the record's path so a
// diagnostic always points at the field that caused it.
template<class F>
auto with_path(const std::string &path, F &&f)
{
    try {
        return f();
    } catch (const Error &e) {
        if (e.code() == ErrorCode::config_invalid)
            throw;
        fail(ErrorCode::config_invalid, path + ": " + e.detail());
    }
}

} // namespace

Json to_json(const Schedule &s)
{
    return {{"start", s.start},
            {"end", s.end},
            {"interval", s.interval},
            {"duration", s.duration},
            {"max_start_delay", s.max_start_delay}};
}

Schedule schedule_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    Schedule s{
        .start = r.get<TimestampMs>("start"),
        .end = r.get<TimestampMs>("end"),
        .interval = r.get<DurationMs>("interval"),
        .duration = r.get<DurationMs>("duration"),
        .max_start_delay = r.get_or<DurationMs>("max_start_delay", 0),
    };
    r.finish();
    return s;
}

Json to_json(const DeploymentSpec &d)
{
    Json j{{"id", d.id.value},
           {"consumer", d.consumer.value},
           {"schedule", to_json(d.schedule)},
           {"reward_per_execution", d.reward_per_execution},
           {"min_reputation", nullptr},
           {"min_security_level", nullptr},
           {"destination", d.destination},
           {"resource_requirements",
            {{"memory", d.resources.memory_bytes},
             {"network_requests", d.resources.network_requests},
             {"storage", d.resources.storage_bytes}}}};
    if (d.min_reputation)
        j["min_reputation"] = *d.min_reputation;
    if (d.min_security_level)
        j["min_security_level"] = *d.min_security_level;
    return j;
}

DeploymentSpec deployment_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    DeploymentSpec d;
    d.id = DeploymentId{r.get<std::uint64_t>("id")};
    d.consumer = AccountId{r.get<std::string>("consumer")};
    d.schedule = schedule_from_json(r.at("schedule"), r.field("schedule"));
    d.reward_per_execution = r.get<TokenAmount>("reward_per_execution");
    d.min_reputation = r.get_optional<double>("min_reputation");
    d.min_security_level = r.get_optional<std::uint32_t>("min_security_level");
    d.destination = r.get_or<std::string>("destination", "");
    if (r.has("resource_requirements")) {
        ObjectReader rr(r.at("resource_requirements"), r.field("resource_requirements"));
        d.resources.memory_bytes = rr.get_or<std::uint64_t>("memory", 0);
        d.resources.network_requests = rr.get_or<std::uint64_t>("network_requests", 0);
        d.resources.storage_bytes = rr.get_or<std::uint64_t>("storage", 0);
        rr.finish();
    }
    r.finish();
    with_path(path, [&] {
        validate(d);
        return 0;
    });
    return d;
}

Json to_json(const DeploymentState &s)
{
    Json j{{"state", std::string(state_name(s))}};
    if (const auto *done = std::get_if<state::Done>(&s)) {
        j["succeeded"] = done->outcome.succeeded;
        j["failed"] = done->outcome.failed;
    }
    return j;
}

DeploymentState state_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    const auto name = r.get<std::string>("state");
    DeploymentState out;
    if (name == "OPEN")
        out = state::Open{};
    else if (name == "MATCHED")
        out = state::Matched{};
    else if (name == "ASSIGNED")
        out = state::Assigned{};
    else if (name == "DONE")
        out = state::Done{{r.get<std::uint32_t>("succeeded"), r.get<std::uint32_t>("failed")}};
    else
        fail(ErrorCode::config_invalid, r.field("state") + ": unknown state '" + name + "'");
    r.finish();
    return out;
}

Json to_json(const ExecutionReport &rep)
{
    Json j{{"deployment", rep.deployment.value},
           {"execution_index", rep.execution_index},
           {"reported_at", rep.reported_at}};
    if (const auto *ok = std::get_if<ExecutionSuccess>(&rep.outcome)) {
        j["outcome"] = "success";
        j["settlement_ref"] = ok->settlement_ref;
    } else {
        j["outcome"] = "failure";
        j["error"] = std::get<ExecutionFailure>(rep.outcome).error;
    }
    return j;
}

ExecutionReport report_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    ExecutionReport rep;
    rep.deployment = DeploymentId{r.get<std::uint64_t>("deployment")};
    rep.execution_index = r.get<std::uint32_t>("execution_index");
    rep.reported_at = r.get<TimestampMs>("reported_at");
    const auto outcome = r.get<std::string>("outcome");
    if (outcome == "success")
        rep.outcome = ExecutionSuccess{r.get<std::string>("settlement_ref")};
    else if (outcome == "failure")
        rep.outcome = ExecutionFailure{r.get<std::string>("error")};
    else
        fail(ErrorCode::config_invalid, r.field("outcome") + ": expected 'success' or 'failure'");
    r.finish();
    return rep;
}

Json to_json(const AttestationRecord &a)
{
    return {{"processor", a.processor.value}, {"device_model", a.device_model}, {"security_level", a.security_level},
            {"issued_at", a.issued_at},       {"expires_at", a.expires_at},     {"revoked", a.revoked}};
}

AttestationRecord attestation_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    AttestationRecord a{
        .processor = AccountId{r.get<std::string>("processor")},
        .device_model = r.get_or<std::string>("device_model", ""),
        .security_level = r.get_or<std::uint32_t>("security_level", 0),
        .issued_at = r.get<TimestampMs>("issued_at"),
        .expires_at = r.get<TimestampMs>("expires_at"),
        .revoked = r.get_or<bool>("revoked", false),
    };
    r.finish();
    if (a.issued_at >= a.expires_at)
        fail(ErrorCode::config_invalid, path + ": issued_at must precede expires_at");
    return a;
}

Json to_json(const AttestationRegistry &registry)
{
    Json out = Json::array();
    for (const auto &rec : registry.records())
        out.push_back(to_json(rec));
    return out;
}

AttestationRegistry registry_from_json(const Json &j, const std::string &path)
{
    AttestationRegistry registry;
    auto records = read_array<AttestationRecord>(
        j, path, [](const Json &x, const std::string &p) { return attestation_from_json(x, p); });
    for (std::size_t i = 0; i < records.size(); ++i) {
        const bool revoked = records[i].revoked;
        records[i].revoked = false;
        const auto id = records[i].processor;
        with_path(path + "[" + std::to_string(i) + "]", [&] {
            registry.register_record(records[i]);
            return 0;
        });
        if (revoked)
            registry.revoke(id);
    }
    return registry;
}

Json to_json(const ReputationAccumulator &acc)
{
    return {{"r", acc.r}, {"s", acc.s}, {"n", acc.n}, {"reward_sum", acc.reward_sum}, {"lambda", acc.params.lambda()}};
}

ReputationAccumulator reputation_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    ReputationAccumulator acc;
    acc.params = with_path(r.field("lambda"), [&] { return ReputationParams(r.get<double>("lambda")); });
    acc.r = r.get<double>("r");
    acc.s = r.get<double>("s");
    acc.n = r.get<std::uint64_t>("n");
    acc.reward_sum = r.get<TokenAmount>("reward_sum");
    r.finish();
    const double bound = acc.params.max_sum() * (1.0 + 1e-12);
    if (!(acc.r >= 0.0 && acc.r <= bound && acc.s >= 0.0 && acc.s <= bound))
        fail(ErrorCode::config_invalid, path + ": r and s must lie in [0, 1/(1-lambda)]");
    if (acc.n == 0 && (acc.r != 0.0 || acc.s != 0.0 || acc.reward_sum != 0))
        fail(ErrorCode::config_invalid, path + ": an accumulator without updates must be zero");
    return acc;
}

Json to_json(const BenchmarkVector &v)
{
    Json j = Json::object();
    for (auto m : all_metrics)
        j[std::string(metric_name(m))] = v[m];
    return j;
}

BenchmarkVector benchmark_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    BenchmarkVector v;
    for (auto m : all_metrics)
        v[m] = r.get_or<double>(metric_name(m), 0.0);
    r.finish();
    with_path(path, [&] {
        validate(v);
        return 0;
    });
    return v;
}

Json to_json(const ProcessorCalendar &c)
{
    Json out = Json::array();
    for (const auto &b : c.intervals())
        out.push_back({{"start", b.start}, {"end", b.end}, {"owner", b.owner.value}});
    return out;
}

ProcessorCalendar calendar_from_json(const Json &j, const std::string &path)
{
    auto intervals = read_array<BusyInterval>(j, path, [](const Json &x, const std::string &p) {
        ObjectReader r(x, p);
        BusyInterval b{r.get<TimestampMs>("start"), r.get<TimestampMs>("end"),
                       DeploymentId{r.get_or<std::uint64_t>("owner", 0)}};
        r.finish();
        return b;
    });
    return with_path(path, [&] { return ProcessorCalendar(std::move(intervals)); });
}

Json to_json(const ProcessorAdvertisement &ad)
{
    return {{"processor", ad.processor.value},
            {"benchmark", to_json(ad.benchmark)},
            {"ask_price_per_execution", ad.ask_price_per_execution},
            {"calendar", to_json(ad.calendar)},
            {"active", ad.active}};
}

ProcessorAdvertisement advertisement_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    ProcessorAdvertisement ad;
    ad.processor = AccountId{r.get<std::string>("processor")};
    if (r.has("benchmark"))
        ad.benchmark = benchmark_from_json(r.at("benchmark"), r.field("benchmark"));
    ad.ask_price_per_execution = r.get<TokenAmount>("ask_price_per_execution");
    if (r.has("calendar"))
        ad.calendar = calendar_from_json(r.at("calendar"), r.field("calendar"));
    ad.active = r.get_or<bool>("active", true);
    r.finish();
    return ad;
}

Json to_json(const ExecutionSlot &s)
{
    return {{"deployment", s.deployment.value}, {"index", s.index}, {"start", s.start}, {"end", s.end}};
}

Json to_json(const Assignment &a)
{
    Json slots = Json::array();
    for (const auto &s : a.slots)
        slots.push_back(to_json(s));
    return {{"deployment", a.deployment.value},
            {"processor", a.processor.value},
            {"start_delay", a.start_delay},
            {"slots", slots},
            {"agreed_price_per_execution", a.agreed_price_per_execution}};
}

Json to_json(const MarketEvent &e)
{
    Json j{{"time", e.time},
           {"kind", std::string(to_string(e.kind))},
           {"deployment", e.deployment.value},
           {"processor", nullptr},
           {"amount", e.amount},
           {"reputation_after", nullptr}};
    if (e.processor)
        j["processor"] = e.processor->value;
    if (e.reputation_after)
        j["reputation_after"] = *e.reputation_after;
    if (e.slot_index)
        j["slot"] = e.slot_index;
    return j;
}

Json to_json(const Delegation &d)
{
    return {{"delegator", d.delegator.value}, {"stake", d.stake}, {"cooldown", d.cooldown}};
}

Json to_json(const StakeCommitment &c)
{
    Json delegations = Json::array();
    for (const auto &d : c.delegations)
        delegations.push_back(to_json(d));
    return {{"committer", c.committer.value},
            {"own_stake", c.own_stake},
            {"cooldown", c.cooldown},
            {"committed_compute", to_json(c.committed_compute)},
            {"delegation_fee", c.delegation_fee},
            {"delegations", delegations},
            {"status", {{"phase", std::string(to_string(c.status.phase))}, {"since", c.status.since}}}};
}

StakeCommitment commitment_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    StakeCommitment c;
    c.committer = AccountId{r.get<std::string>("committer")};
    c.own_stake = r.get<TokenAmount>("own_stake");
    c.cooldown = r.get<EpochIndex>("cooldown");
    c.committed_compute = benchmark_from_json(r.at("committed_compute"), r.field("committed_compute"));
    c.delegation_fee = r.get_or<double>("delegation_fee", 0.0);
    if (r.has("delegations")) {
        c.delegations = read_array<Delegation>(r.at("delegations"), r.field("delegations"),
                                               [](const Json &x, const std::string &p) {
                                                   ObjectReader d(x, p);
                                                   Delegation out{AccountId{d.get<std::string>("delegator")},
                                                                  d.get<TokenAmount>("stake"),
                                                                  d.get<EpochIndex>("cooldown")};
                                                   d.finish();
                                                   return out;
                                               });
    }
    if (r.has("status")) {
        ObjectReader s(r.at("status"), r.field("status"));
        const auto phase = s.get<std::string>("phase");
        if (phase == "active")
            c.status.phase = CommitmentPhase::active;
        else if (phase == "cooling_down")
            c.status.phase = CommitmentPhase::cooling_down;
        else if (phase == "released")
            c.status.phase = CommitmentPhase::released;
        else
            fail(ErrorCode::config_invalid, s.field("phase") + ": unknown phase '" + phase + "'");
        c.status.since = s.get_or<EpochIndex>("since", 0);
        s.finish();
    }
    r.finish();
    return c;
}

Json to_json(const InflationConfig &c)
{
    return {{"emission_per_epoch", static_cast<double>(c.emission_per_epoch) / base_units_per_token},
            {"split",
             {{"staked_pool", c.split.staked_pool},
              {"treasury", c.split.treasury},
              {"base_benchmark", c.split.base_benchmark},
              {"collators", c.split.collators}}},
            {"max_slash_rate", c.max_slash_rate},
            {"tau_max", c.tau_max},
            {"execution_bonus", c.execution_bonus}};
}

InflationConfig inflation_from_json(const Json &j, const std::string &path)
{
    ObjectReader r(j, path);
    InflationConfig c;
    const double emission = r.get_or<double>("emission_per_epoch", static_cast<double>(c.emission_per_epoch) /
                                                                        base_units_per_token);
    if (!(emission >= 0.0) || !std::isfinite(emission))
        fail(ErrorCode::config_invalid, r.field("emission_per_epoch") + ": must be a non-negative token amount");
    c.emission_per_epoch = static_cast<TokenAmount>(std::llround(emission * base_units_per_token));
    if (r.has("split")) {
        ObjectReader s(r.at("split"), r.field("split"));
        c.split.staked_pool = s.get_or<double>("staked_pool", c.split.staked_pool);
        c.split.treasury = s.get_or<double>("treasury", c.split.treasury);
        c.split.base_benchmark = s.get_or<double>("base_benchmark", c.split.base_benchmark);
        c.split.collators = s.get_or<double>("collators", c.split.collators);
        s.finish();
    }
    c.max_slash_rate = r.get_or<double>("max_slash_rate", c.max_slash_rate);
    c.tau_max = r.get_or<EpochIndex>("tau_max", c.tau_max);
    c.execution_bonus = r.get_or<double>("execution_bonus", c.execution_bonus);
    r.finish();
    try {
        validate(c);
    } catch (const Error &e) {
        fail(ErrorCode::config_invalid, path + ": " + e.detail());
    }
    return c;
}

} // namespace cmx
