#include "cmx/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace cmx {

namespace {

TokenAmount tokens_from(ObjectReader &r, std::string_view key)
{
    const double tokens = r.get<double>(key);
    if (!std::isfinite(tokens) || tokens < 0.0 || tokens > 1.8e13)
        fail(ErrorCode::config_invalid, r.field(key) + ": expected a non-negative token amount");
    return static_cast<TokenAmount>(std::llround(tokens * base_units_per_token));
}

double tokens_of(TokenAmount base)
{
    return static_cast<double>(base) / base_units_per_token;
}

Json range_to_json(const UniformRange &r)
{
    return Json::array({r.lo, r.hi});
}

UniformRange range_from(ObjectReader &r, std::string_view key, UniformRange fallback)
{
    if (!r.has(key) || r.at(key).is_null())
        return fallback;
    const auto &j = r.at(key);
    if (!j.is_array() || j.size() != 2)
        fail(ErrorCode::config_invalid, r.field(key) + ": expected [lo, hi]");
    UniformRange out{ObjectReader::convert<double>(j[0], r.field(key) + "[0]"),
                     ObjectReader::convert<double>(j[1], r.field(key) + "[1]")};
    if (!(out.lo <= out.hi))
        fail(ErrorCode::config_invalid, r.field(key) + ": lo must not exceed hi");
    return out;
}

template<class T, class F>
std::vector<T> list_from(ObjectReader &r, std::string_view key, F &&read_one)
{
    std::vector<T> out;
    if (!r.has(key))
        return out;
    const auto &j = r.at(key);
    const auto path = r.field(key);
    if (!j.is_array())
        fail(ErrorCode::config_invalid, path + ": expected an array");
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(read_one(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

SimConfig sim_from(const Json &j, SimConfig c)
{
    ObjectReader r(j, "sim");
    c.n_processors = r.get_or("n_processors", c.n_processors);
    c.n_consumers = r.get_or("n_consumers", c.n_consumers);
    c.steps = r.get_or("steps", c.steps);
    c.iterations = r.get_or("iterations", c.iterations);
    c.group_success_rates = r.get_or("group_success_rates", c.group_success_rates);
    c.reputation_enabled = r.get_or("reputation_enabled", c.reputation_enabled);
    c.p_min_rep_consumer = r.get_or("p_min_rep_consumer", c.p_min_rep_consumer);
    c.min_rep_range = range_from(r, "min_rep_distribution", c.min_rep_range);
    c.reward_range = range_from(r, "reward_distribution", c.reward_range);
    c.ask_range = range_from(r, "ask_distribution", c.ask_range);
    c.seed = r.get_or("seed", c.seed);
    c.step_ms = r.get_or("step_ms", c.step_ms);
    c.execution_ms = r.get_or("execution_ms", c.execution_ms);
    r.finish();
    return c;
}

Json sim_to_json(const SimConfig &c)
{
    return {{"n_processors", c.n_processors},
            {"n_consumers", c.n_consumers},
            {"steps", c.steps},
            {"iterations", c.iterations},
            {"group_success_rates", c.group_success_rates},
            {"reputation_enabled", c.reputation_enabled},
            {"p_min_rep_consumer", c.p_min_rep_consumer},
            {"min_rep_distribution", range_to_json(c.min_rep_range)},
            {"reward_distribution", range_to_json(c.reward_range)},
            {"ask_distribution", range_to_json(c.ask_range)},
            {"seed", c.seed},
            {"step_ms", c.step_ms},
            {"execution_ms", c.execution_ms}};
}

EconomyScenario economy_from(const Json &j)
{
    EconomyScenario e;
    ObjectReader r(j, "economy");
    Json inflation = Json::object();
    for (const char *key : {"emission_per_epoch", "split", "max_slash_rate", "tau_max", "execution_bonus"}) {
        if (r.has(key))
            inflation[key] = r.at(key);
    }
    e.inflation = inflation_from_json(inflation, "economy");
    if (r.has("total_supply"))
        e.total_supply = tokens_from(r, "total_supply");
    e.slasher = AccountId{r.get_or<std::string>("slasher", e.slasher.value)};
    e.epochs = r.get_or("epochs", e.epochs);
    if (r.has("accounts")) {
        ObjectReader accounts(r.at("accounts"), r.field("accounts"));
        for (const auto &[name, _] : r.at("accounts").items())
            e.accounts[AccountId{name}] = tokens_from(accounts, name);
    }
    e.providers = list_from<ProviderSpec>(r, "providers", [](const Json &x, const std::string &p) {
        ObjectReader pr(x, p);
        ProviderSpec out{AccountId{pr.get<std::string>("id")},
                         benchmark_from_json(pr.at("measured"), pr.field("measured"))};
        pr.finish();
        return out;
    });
    e.commitments = list_from<CommitmentSpec>(r, "commitments", [](const Json &x, const std::string &p) {
        ObjectReader cr(x, p);
        CommitmentSpec out;
        out.committer = AccountId{cr.get<std::string>("committer")};
        out.own_stake = tokens_from(cr, "own_stake");
        out.cooldown = cr.get<EpochIndex>("cooldown");
        out.committed = benchmark_from_json(cr.at("committed"), cr.field("committed"));
        out.delegation_fee = cr.get_or("delegation_fee", 0.0);
        out.delegations = list_from<Delegation>(cr, "delegations", [](const Json &y, const std::string &q) {
            ObjectReader dr(y, q);
            Delegation d{AccountId{dr.get<std::string>("delegator")}, tokens_from(dr, "stake"),
                         dr.get<EpochIndex>("cooldown")};
            dr.finish();
            return d;
        });
        out.cooldown_start = cr.get_optional<EpochIndex>("cooldown_start");
        cr.finish();
        return out;
    });
    e.shortfalls = list_from<ShortfallSpec>(r, "shortfalls", [](const Json &x, const std::string &p) {
        ObjectReader sr(x, p);
        ShortfallSpec out{AccountId{sr.get<std::string>("provider")}, sr.get<EpochIndex>("from"),
                          sr.get<EpochIndex>("to"), sr.get<double>("factor")};
        sr.finish();
        if (!(out.factor >= 0.0 && out.factor <= 1.0))
            fail(ErrorCode::config_invalid, p + ".factor: must lie in [0, 1]");
        if (out.from > out.to)
            fail(ErrorCode::config_invalid, p + ".to: must not precede from");
        return out;
    });
    e.executions = list_from<ExecutionSpec>(r, "executions", [](const Json &x, const std::string &p) {
        ObjectReader er(x, p);
        ExecutionSpec out{AccountId{er.get<std::string>("provider")}, er.get<EpochIndex>("from"),
                          er.get<EpochIndex>("to")};
        er.finish();
        if (out.from > out.to)
            fail(ErrorCode::config_invalid, p + ".to: must not precede from");
        return out;
    });
    r.finish();

    auto is_provider = [&](const AccountId &id) {
        return std::any_of(e.providers.begin(), e.providers.end(), [&](const ProviderSpec &p) { return p.id == id; });
    };
    for (std::size_t i = 0; i < e.commitments.size(); ++i) {
        if (!is_provider(e.commitments[i].committer))
            fail(ErrorCode::config_invalid,
                 "economy.commitments[" + std::to_string(i) + "].committer: " + e.commitments[i].committer.value +
                     " is not a listed provider");
    }
    return e;
}

Json economy_to_json(const EconomyScenario &e)
{
    Json j = to_json(e.inflation);
    j["total_supply"] = tokens_of(e.total_supply);
    j["slasher"] = e.slasher.value;
    j["epochs"] = e.epochs;
    Json accounts = Json::object();
    for (const auto &[id, amount] : e.accounts)
        accounts[id.value] = tokens_of(amount);
    j["accounts"] = accounts;
    Json providers = Json::array();
    for (const auto &p : e.providers)
        providers.push_back({{"id", p.id.value}, {"measured", to_json(p.measured)}});
    j["providers"] = providers;
    Json commitments = Json::array();
    for (const auto &c : e.commitments) {
        Json delegations = Json::array();
        for (const auto &d : c.delegations)
            delegations.push_back({{"delegator", d.delegator.value}, {"stake", tokens_of(d.stake)}, {"cooldown", d.cooldown}});
        Json cj{{"committer", c.committer.value},
                {"own_stake", tokens_of(c.own_stake)},
                {"cooldown", c.cooldown},
                {"committed", to_json(c.committed)},
                {"delegation_fee", c.delegation_fee},
                {"delegations", delegations},
                {"cooldown_start", nullptr}};
        if (c.cooldown_start)
            cj["cooldown_start"] = *c.cooldown_start;
        commitments.push_back(cj);
    }
    j["commitments"] = commitments;
    Json shortfalls = Json::array();
    for (const auto &s : e.shortfalls)
        shortfalls.push_back({{"provider", s.provider.value}, {"from", s.from}, {"to", s.to}, {"factor", s.factor}});
    j["shortfalls"] = shortfalls;
    Json executions = Json::array();
    for (const auto &x : e.executions)
        executions.push_back({{"provider", x.provider.value}, {"from", x.from}, {"to", x.to}});
    j["executions"] = executions;
    return j;
}

} // namespace

Scenario scenario_from_json(const Json &j)
{
    ObjectReader r(j, "");
    Scenario s;
    if (r.has("sim"))
        s.sim = sim_from(r.at("sim"), s.sim);
    if (r.has("reputation")) {
        ObjectReader rr(r.at("reputation"), "reputation");
        const double lambda = rr.get_or("lambda", s.sim.reputation.lambda());
        rr.finish();
        try {
            s.sim.reputation = ReputationParams(lambda);
        } catch (const Error &e) {
            fail(ErrorCode::config_invalid, std::string("reputation.lambda: ") + e.detail());
        }
    }
    if (r.has("scheduler")) {
        ObjectReader sr(r.at("scheduler"), "scheduler");
        s.sim.grace.fraction_of_duration = sr.get_or("report_grace_fraction", s.sim.grace.fraction_of_duration);
        s.sim.grace.absolute_ms = sr.get_optional<DurationMs>("report_grace_ms");
        sr.finish();
        if (!(s.sim.grace.fraction_of_duration >= 0.0) || !std::isfinite(s.sim.grace.fraction_of_duration))
            fail(ErrorCode::config_invalid, "scheduler.report_grace_fraction: must be non-negative");
        if (s.sim.grace.absolute_ms && *s.sim.grace.absolute_ms < 0)
            fail(ErrorCode::config_invalid, "scheduler.report_grace_ms: must be non-negative");
    }
    if (r.has("economy"))
        s.economy = economy_from(r.at("economy"));
    if (r.has("attestations")) {
        const auto &a = r.at("attestations");
        if (!a.is_array())
            fail(ErrorCode::config_invalid, "attestations: expected an array");
        for (std::size_t i = 0; i < a.size(); ++i)
            s.attestations.push_back(attestation_from_json(a[i], "attestations[" + std::to_string(i) + "]"));
        registry_from_json(a, "attestations");
    }
    r.finish();
    try {
        validate(s.sim);
    } catch (const Error &e) {
        if (e.code() == ErrorCode::config_invalid)
            throw;
        fail(ErrorCode::config_invalid, std::string("sim: ") + e.detail());
    }
    return s;
}

Scenario parse_scenario(const std::string &text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        // Byte offset to line/column.
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        fail(ErrorCode::config_invalid,
             "line " + std::to_string(line) + ", column " + std::to_string(column) + ": syntax error");
    }
    return scenario_from_json(j);
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::config_invalid, path.string() + ": cannot read scenario");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

Json to_json(const Scenario &s)
{
    Json attestations = Json::array();
    for (const auto &a : s.attestations)
        attestations.push_back(to_json(a));
    Json scheduler{{"report_grace_fraction", s.sim.grace.fraction_of_duration}, {"report_grace_ms", nullptr}};
    if (s.sim.grace.absolute_ms)
        scheduler["report_grace_ms"] = *s.sim.grace.absolute_ms;
    return {{"sim", sim_to_json(s.sim)},
            {"reputation", {{"lambda", s.sim.reputation.lambda()}}},
            {"scheduler", scheduler},
            {"economy", economy_to_json(s.economy)},
            {"attestations", attestations}};
}

std::string canonical_text(const Scenario &s)
{
    return to_json(s).dump();
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::invalid_input, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string config_hash(const Scenario &s)
{
    return sha256_hex(canonical_text(s));
}

EpochState epoch_state(const EconomyScenario &scenario, EpochIndex epoch)
{
    std::vector<Heartbeat> heartbeats;
    heartbeats.reserve(scenario.providers.size() * InflationConfig::heartbeats_per_epoch);
    for (const auto &p : scenario.providers) {
        double factor = 1.0;
        for (const auto &s : scenario.shortfalls) {
            if (s.provider == p.id && s.from <= epoch && epoch < s.to)
                factor *= s.factor;
        }
        for (int beat = 0; beat < InflationConfig::heartbeats_per_epoch; ++beat)
            heartbeats.push_back({p.id, scaled(p.measured, factor)});
    }
    EpochState state;
    state.epoch = epoch;
    state.emission = scenario.inflation.emission_per_epoch;
    state.total_supply = scenario.total_supply;
    state.current_compute = current_compute_from(heartbeats);
    for (const auto &x : scenario.executions) {
        if (x.from <= epoch && epoch < x.to)
            state.executed_deployment.insert(x.provider);
    }
    return state;
}

EconomyRun run_economy(const EconomyScenario &scenario, std::optional<EpochIndex> epochs)
{
    EconomyRun run{Economy(scenario.inflation, scenario.total_supply, scenario.slasher), {}, {}};
    auto &economy = run.economy;
    for (const auto &[account, amount] : scenario.accounts)
        economy.fund(account, amount);

    const auto genesis = epoch_state(scenario, 0);
    for (const auto &spec : scenario.commitments) {
        const auto &measured = std::find_if(scenario.providers.begin(), scenario.providers.end(),
                                            [&](const ProviderSpec &p) { return p.id == spec.committer; })
                                   ->measured;
        economy.commit(create_commitment(spec.committer, spec.own_stake, spec.cooldown, spec.committed, measured,
                                         spec.delegation_fee, scenario.inflation.tau_max));
        for (const auto &d : spec.delegations)
            run.delegations.push_back({spec.committer, d.delegator, economy.delegate(spec.committer, d, genesis)});
    }

    const EpochIndex count = epochs.value_or(scenario.epochs);
    run.epochs.reserve(count);
    for (EpochIndex epoch = 0; epoch < count; ++epoch) {
        for (const auto &spec : scenario.commitments) {
            if (spec.cooldown_start == epoch)
                economy.begin_cooldown(spec.committer, epoch);
        }
        run.epochs.push_back(economy.run_epoch(epoch_state(scenario, epoch)));
    }
    economy.audit();
    return run;
}

} // namespace cmx
