#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmx/types.hpp"

namespace cmx {

/// A processor's hardware attestation as seen by the protocol. Security
/// levels are ordinal and scenario-defined, 0 being the weakest class.
struct AttestationRecord {
    AccountId processor;
    std::string device_model;
    std::uint32_t security_level = 0;
    TimestampMs issued_at = 0;
    TimestampMs expires_at = 0;
    bool revoked = false;

    bool operator==(const AttestationRecord &) const = default;
};

class AttestationRegistry {
public:
    /// Rejects issued_at >= expires_at with invalid_input, and a second
    /// non-revoked record for the same processor with duplicate_attestation.
    /// A revoked record may be replaced by a fresh one.
    void register_record(AttestationRecord record);

    /// Idempotent; unknown_processor when no record exists.
    void revoke(const AccountId &processor);

    /// Valid over the half-open interval [issued_at, expires_at) unless revoked.
    bool is_valid(const AccountId &processor, TimestampMs at) const;

    const AttestationRecord *find(const AccountId &processor) const;

    /// Records sorted by processor id.
    std::vector<AttestationRecord> records() const;

    std::size_t size() const noexcept { return _records.size(); }

private:
    std::unordered_map<AccountId, AttestationRecord> _records;
};

} // namespace cmx
