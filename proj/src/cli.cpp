#include "cmx/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "cmx/abm.hpp"
#include "cmx/error.hpp"
#include "cmx/json_io.hpp"
#include "cmx/orchestrator.hpp"
#include "cmx/scenario.hpp"

namespace cmx {

std::string format_real(double value)
{
    if (value == 0.0)
        return "0"; // folds -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

namespace fs = std::filesystem;

enum class Format { csv, json };

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const Cell &c)
{
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>)
                return v;
            else if constexpr (std::is_same_v<T, double>)
                return format_real(v);
            else
                return std::to_string(v);
        },
        c);
}

Json cell_json(const Cell &c)
{
    return std::visit([](const auto &v) { return Json(v); }, c);
}

std::string render(const Table &t, Format format)
{
    std::string out;
    if (format == Format::csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out += (i ? "," : "") + t.columns[i];
        out += '\n';
        for (const auto &row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out += (i ? "," : "") + cell_text(row[i]);
            out += '\n';
        }
        return out;
    }
    Json arr = Json::array();
    for (const auto &row : t.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            obj[t.columns[i]] = cell_json(row[i]);
        arr.push_back(std::move(obj));
    }
    return arr.dump(1) + "\n";
}

std::string extension(Format f)
{
    return f == Format::csv ? ".csv" : ".json";
}

void write_file(const fs::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::invalid_input, "cannot write " + path.string());
    out << content;
    if (!out.flush())
        fail(ErrorCode::invalid_input, "cannot write " + path.string());
}

/// Writes the tables and a manifest naming every file with its digest.
void write_outputs(const fs::path &dir, Format format, const std::vector<Table> &tables, Json manifest)
{
    fs::create_directories(dir);
    Json files = Json::object();
    for (const auto &t : tables) {
        const auto name = t.name + extension(format);
        const auto text = render(t, format);
        write_file(dir / name, text);
        files[name] = sha256_hex(text);
    }
    manifest["files"] = files;
    manifest["version"] = {{"cmx", version},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                           {"cli11", CLI11_VERSION}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Scenario scenario_or_default(const std::string &path)
{
    return path.empty() ? Scenario{} : load_scenario(path);
}

Json base_manifest(const std::string &command, const Scenario &s)
{
    return {{"command", command}, {"config_hash", config_hash(s)}, {"seed", s.sim.seed}};
}

struct Common {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    Format format = Format::csv;
};

void cmd_simulate(const Common &opts, std::ostream &out)
{
    auto scenario = scenario_or_default(opts.scenario);
    if (opts.seed)
        scenario.sim.seed = *opts.seed;
    const auto &config = scenario.sim;
    const auto result = run_experiment(config);
    const auto &agg = result.aggregate;
    const std::string label = config.reputation_enabled ? "reputation" : "no_reputation";

    Table processors{"processors", {"iteration", "processor", "group", "reputation", "cumulative_reward"}, {}};
    for (const auto &p : agg.processors)
        processors.add({std::uint64_t{p.iteration}, p.processor.value, std::uint64_t{p.group}, p.reputation,
                        p.cumulative_reward});

    Table summary{"summary", {"scenario", "group", "mean_reward", "share", "failure_rate", "gini"}, {}};
    for (std::size_t g = 0; g < agg.groups.size(); ++g)
        summary.add({label, std::uint64_t{g}, agg.groups[g].mean_reward, agg.groups[g].share, agg.failure_rate,
                     agg.gini});

    Table trajectory{"trajectory", {"step", "group", "mean_score"}, {}};
    for (std::size_t s = 0; s < agg.trajectory.size(); ++s) {
        for (std::size_t g = 0; g < agg.trajectory[s].size(); ++g)
            trajectory.add({std::uint64_t{s}, std::uint64_t{g}, agg.trajectory[s][g]});
    }

    auto manifest = base_manifest("simulate", scenario);
    manifest["scenario"] = label;
    write_outputs(opts.out, opts.format, {processors, summary, trajectory}, std::move(manifest));
    out << label << ": " << agg.processors.size() << " processor records, failure_rate "
        << format_real(agg.failure_rate) << ", gini " << format_real(agg.gini) << "\n";
}

void cmd_epochs(const Common &opts, std::optional<EpochIndex> epochs, std::ostream &out)
{
    auto scenario = scenario_or_default(opts.scenario);
    if (opts.seed)
        scenario.sim.seed = *opts.seed;
    if (epochs)
        scenario.economy.epochs = *epochs;
    const auto run = run_economy(scenario.economy);

    Table rows{"epochs", {"epoch", "account", "pool", "theta", "reward", "slash", "burned"}, {}};
    TokenAmount paid = 0, from_rewards = 0, from_stake = 0, treasury = 0, collators = 0, burned = 0,
                to_slasher = 0;
    for (const auto &led : run.epochs) {
        for (const auto &s : led.staked_shares)
            rows.add({led.epoch, s.account.value, std::string(metric_name(s.pool)), s.theta, s.amount,
                      std::uint64_t{0}, std::uint64_t{0}});
        for (const auto &s : led.base_shares)
            rows.add({led.epoch, s.account.value, "base_" + std::string(metric_name(s.pool)), s.theta, s.amount,
                      std::uint64_t{0}, std::uint64_t{0}});
        for (const auto &c : led.commitments) {
            rows.add({led.epoch, c.committer.value, "commitment", 0.0, c.gross, c.slash.penalty, c.slash.burned});
            burned += c.slash.burned;
            to_slasher += c.slash.to_slasher;
        }
        rows.add({led.epoch, "treasury", "treasury", 0.0, led.treasury, std::uint64_t{0}, std::uint64_t{0}});
        rows.add({led.epoch, "collators", "collators", 0.0, led.collators, std::uint64_t{0}, std::uint64_t{0}});
        paid += led.paid_out();
        from_rewards += led.slash_from_rewards();
        from_stake += led.slash_from_stake();
        treasury += led.treasury;
        collators += led.collators;
    }

    const auto &ledger = run.economy.ledger();
    std::map<std::string, std::pair<TokenAmount, TokenAmount>> accounts;
    for (const auto &[id, balance] : ledger.balances())
        accounts[id.value].first = balance;
    for (const auto &c : run.economy.commitments()) {
        if (c.status.phase == CommitmentPhase::released)
            continue;
        accounts[c.committer.value].second += c.own_stake;
        for (const auto &d : c.delegations)
            accounts[d.delegator.value].second += d.stake;
    }
    Table balances{"balances", {"account", "balance", "bonded"}, {}};
    for (const auto &[id, v] : accounts)
        balances.add({id, v.first, v.second});
    balances.add({"sink:treasury", ledger.sink(Sink::treasury), std::uint64_t{0}});
    balances.add({"sink:collators", ledger.sink(Sink::collators), std::uint64_t{0}});
    balances.add({"sink:burn", ledger.sink(Sink::burn), std::uint64_t{0}});

    const TokenAmount emitted = scenario.economy.inflation.emission_per_epoch * run.epochs.size();
    const TokenAmount accounted = paid + from_rewards + treasury + collators;
    Table summary{"summary", {"key", "value"}, {}};
    summary.add({"epochs", std::uint64_t{run.epochs.size()}});
    summary.add({"emission_total", emitted});
    summary.add({"paid_out", paid});
    summary.add({"treasury", treasury});
    summary.add({"collators", collators});
    summary.add({"slash_from_rewards", from_rewards});
    summary.add({"slash_from_stake", from_stake});
    summary.add({"to_slasher", to_slasher});
    summary.add({"burned", burned});
    summary.add({"accounted", accounted});
    summary.add({"conservation", accounted == emitted ? "ok" : "violated"});
    for (const auto &d : run.delegations)
        summary.add({"delegation:" + d.committer.value + ":" + d.delegator.value,
                     d.rejection ? std::string(to_string(*d.rejection)) : "accepted"});

    auto manifest = base_manifest("epochs", scenario);
    manifest["epochs"] = run.epochs.size();
    write_outputs(opts.out, opts.format, {rows, balances, summary}, std::move(manifest));
    out << "epochs: " << run.epochs.size() << ", emission " << emitted << ", accounted " << accounted << "\n";
    if (accounted != emitted)
        fail(ErrorCode::conservation_violation, "emission not fully accounted");
}

Json read_json_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::config_invalid, path + ": cannot read");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        fail(ErrorCode::config_invalid, path + ": " + e.what());
    }
}

void cmd_match(const std::string &deployments_path, const std::string &ads_path, const std::string &scenario_path,
               TimestampMs now, Format format, std::ostream &out)
{
    const auto scenario = scenario_or_default(scenario_path);
    const auto deployments_json = read_json_file(deployments_path);
    const auto ads_json = read_json_file(ads_path);
    if (!deployments_json.is_array())
        fail(ErrorCode::config_invalid, "deployments: expected an array");
    if (!ads_json.is_array())
        fail(ErrorCode::config_invalid, "advertisements: expected an array");

    Orchestrator orch({scenario.sim.reputation, scenario.sim.grace, true});
    for (const auto &a : scenario.attestations)
        orch.attestations().register_record(a);

    std::vector<DeploymentSpec> specs;
    for (std::size_t i = 0; i < deployments_json.size(); ++i)
        specs.push_back(deployment_from_json(deployments_json[i], "deployments[" + std::to_string(i) + "]"));

    for (std::size_t i = 0; i < ads_json.size(); ++i) {
        const auto path = "advertisements[" + std::to_string(i) + "]";
        require_object(ads_json[i], path);
        Json ad_json = ads_json[i];
        std::optional<AttestationRecord> attestation;
        std::optional<ReputationAccumulator> reputation;
        if (ad_json.contains("attestation")) {
            Json a = ad_json["attestation"];
            require_object(a, path + ".attestation");
            a["processor"] = ad_json.value("processor", "");
            attestation = attestation_from_json(a, path + ".attestation");
            ad_json.erase("attestation");
        }
        if (ad_json.contains("reputation")) {
            reputation = reputation_from_json(ad_json["reputation"], path + ".reputation");
            ad_json.erase("reputation");
        }
        const auto ad = advertisement_from_json(ad_json, path);
        if (attestation)
            orch.attestations().register_record(*attestation);
        orch.advertise(ad);
        if (reputation) {
            if (reputation->params.lambda() != scenario.sim.reputation.lambda())
                fail(ErrorCode::config_invalid, path + ".reputation.lambda: differs from the scenario lambda");
            orch.restore_reputation(ad.processor, *reputation);
        }
    }

    Table table{"match", {"deployment", "processor", "status", "start_delay", "reason"}, {}};
    for (const auto &spec : specs) {
        const auto slots = execution_count(spec.schedule, 0);
        orch.ledger().mint(spec.consumer, static_cast<TokenAmount>(slots) * spec.reward_per_execution);
        const auto id = orch.register_deployment(spec, now);
        const auto verdicts = orch.evaluate(id, now);
        const auto assignment = orch.match(id, now);
        if (format == Format::json) {
            Json line{{"deployment", id.value}, {"assignment", nullptr}, {"rejections", Json::array()}};
            if (assignment)
                line["assignment"] = to_json(*assignment);
            for (const auto &v : verdicts) {
                if (v.rejection)
                    line["rejections"].push_back(
                        {{"processor", v.processor.value}, {"reason", std::string(to_string(*v.rejection))}});
            }
            out << line.dump() << "\n";
            continue;
        }
        if (assignment)
            table.add({id.value, assignment->processor.value, "assigned", std::int64_t{assignment->start_delay}, ""});
        for (const auto &v : verdicts) {
            if (v.rejection)
                table.add({id.value, v.processor.value, "rejected", "", std::string(to_string(*v.rejection))});
        }
        if (!assignment && verdicts.empty())
            table.add({id.value, "", "unmatched", "", "no processors"});
    }
    if (format == Format::csv)
        out << render(table, format);
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Compute marketplace engine and simulator", "cmx"};
    app.require_subcommand(0, 1);
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default scenario with every field and exit");

    const std::map<std::string, Format> formats{{"csv", Format::csv}, {"json", Format::json}};
    auto add_common = [&](CLI::App *sub, Common &c, bool needs_out) {
        sub->add_option("--scenario", c.scenario, "Scenario file (defaults apply when omitted)");
        sub->add_option("--seed", c.seed, "Seed override");
        auto *o = sub->add_option("--out", c.out, "Output directory");
        if (needs_out)
            o->required();
        sub->add_option("--format", c.format, "Output format: csv or json")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    };

    Common simulate_opts;
    auto *simulate = app.add_subcommand("simulate", "Run the agent-based experiment");
    add_common(simulate, simulate_opts, true);

    Common epochs_opts;
    std::optional<EpochIndex> epoch_count;
    auto *epochs = app.add_subcommand("epochs", "Run the staked-compute economy");
    add_common(epochs, epochs_opts, true);
    epochs->add_option("--epochs", epoch_count, "Number of epochs (overrides the scenario)");

    Common match_opts;
    std::string deployments_path, ads_path;
    TimestampMs now = 0;
    auto *match = app.add_subcommand("match", "One-shot matching of deployments against advertisements");
    match->add_option("deployments", deployments_path, "Deployments file")->required();
    match->add_option("advertisements", ads_path, "Advertisements file")->required();
    match->add_option("--scenario", match_opts.scenario, "Scenario supplying lambda, grace and attestations");
    match->add_option("--now", now, "Current time in ms");
    match_opts.format = Format::json;
    match->add_option("--format", match_opts.format, "Output format: json (lines) or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (print_defaults) {
            out << to_json(Scenario{}).dump(2) << "\n";
            return exit_ok;
        }
        if (simulate->parsed())
            cmd_simulate(simulate_opts, out);
        else if (epochs->parsed())
            cmd_epochs(epochs_opts, epoch_count, out);
        else if (match->parsed())
            cmd_match(deployments_path, ads_path, match_opts.scenario, now, match_opts.format, out);
        else {
            out << app.help();
            return exit_config;
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::config_invalid ? exit_config : exit_runtime;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace cmx
