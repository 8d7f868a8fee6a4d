#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "cmx/abm.hpp"
#include "cmx/attestation.hpp"
#include "cmx/domain.hpp"
#include "cmx/error.hpp"
#include "cmx/orchestrator.hpp"
#include "cmx/reputation.hpp"
#include "cmx/scheduler.hpp"
#include "cmx/staked_compute.hpp"

namespace cmx {

using Json = nlohmann::json;

/// Strict reader over one JSON object. Every error names the dotted path of
/// the offending field; finish() rejects keys that were never read.
class ObjectReader {
public:
    ObjectReader(const Json &json, std::string path);

    const std::string &path() const noexcept { return _path; }
    bool has(std::string_view key) const;
    const Json &at(std::string_view key);

    template<class T>
    T get(std::string_view key)
    {
        return convert<T>(at(key), field(key));
    }

    template<class T>
    T get_or(std::string_view key, T fallback)
    {
        return has(key) && !_json.at(std::string(key)).is_null() ? get<T>(key) : (mark(key), fallback);
    }

    /// Absent and null both read as nullopt.
    template<class T>
    std::optional<T> get_optional(std::string_view key)
    {
        mark(key);
        if (!has(key) || _json.at(std::string(key)).is_null())
            return std::nullopt;
        return get<T>(key);
    }

    std::string field(std::string_view key) const;
    void finish() const;

    template<class T>
    static T convert(const Json &j, const std::string &where)
    {
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!j.is_number_integer())
                fail(ErrorCode::config_invalid, where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (!j.is_number_unsigned())
                    fail(ErrorCode::config_invalid, where + ": expected a non-negative integer");
                if (j.get<std::uint64_t>() > std::numeric_limits<T>::max())
                    fail(ErrorCode::config_invalid, where + ": integer out of range");
            }
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!j.is_number())
                fail(ErrorCode::config_invalid, where + ": expected a number");
        }
        try {
            return j.get<T>();
        } catch (const nlohmann::json::exception &e) {
            fail(ErrorCode::config_invalid, where + ": " + e.what());
        }
    }

private:
    void mark(std::string_view key) { _seen.emplace(key); }

    const Json &_json;
    std::string _path;
    std::set<std::string, std::less<>> _seen;
};

/// Throws config_invalid naming the path unless `j` is an object.
void require_object(const Json &j, const std::string &path);

Json to_json(const Schedule &s);
Schedule schedule_from_json(const Json &j, const std::string &path = "schedule");

Json to_json(const DeploymentSpec &d);
DeploymentSpec deployment_from_json(const Json &j, const std::string &path = "deployment");

Json to_json(const DeploymentState &s);
DeploymentState state_from_json(const Json &j, const std::string &path = "state");

Json to_json(const ExecutionReport &r);
ExecutionReport report_from_json(const Json &j, const std::string &path = "report");

Json to_json(const AttestationRecord &a);
AttestationRecord attestation_from_json(const Json &j, const std::string &path = "attestation");

Json to_json(const AttestationRegistry &registry);
AttestationRegistry registry_from_json(const Json &j, const std::string &path = "attestations");

Json to_json(const ReputationAccumulator &acc);
ReputationAccumulator reputation_from_json(const Json &j, const std::string &path = "reputation");

Json to_json(const BenchmarkVector &v);
BenchmarkVector benchmark_from_json(const Json &j, const std::string &path = "benchmark");

Json to_json(const ProcessorCalendar &c);
ProcessorCalendar calendar_from_json(const Json &j, const std::string &path = "calendar");

Json to_json(const ProcessorAdvertisement &ad);
ProcessorAdvertisement advertisement_from_json(const Json &j, const std::string &path = "advertisement");

Json to_json(const ExecutionSlot &s);
Json to_json(const Assignment &a);

Json to_json(const MarketEvent &e);

Json to_json(const Delegation &d);
Json to_json(const StakeCommitment &c);
StakeCommitment commitment_from_json(const Json &j, const std::string &path = "commitment");

Json to_json(const InflationConfig &c);
InflationConfig inflation_from_json(const Json &j, const std::string &path = "economy");

} // namespace cmx
