#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratchetlab/errors.hpp"

namespace ratchetlab {

enum class MetadataEvent : std::uint8_t { registered, bundle_fetched, message_relayed, message_delivered };

inline const char* to_string(MetadataEvent e) {
    switch (e) {
        case MetadataEvent::registered: return "registered";
        case MetadataEvent::bundle_fetched: return "bundle_fetched";
        case MetadataEvent::message_relayed: return "message_relayed";
        case MetadataEvent::message_delivered: return "message_delivered";
    }
    return "?";
}

inline MetadataEvent metadata_event_from_string(const std::string& s) {
    if (s == "registered") return MetadataEvent::registered;
    if (s == "bundle_fetched") return MetadataEvent::bundle_fetched;
    if (s == "message_relayed") return MetadataEvent::message_relayed;
    if (s == "message_delivered") return MetadataEvent::message_delivered;
    throw IoError("unknown metadata event '" + s + "'");
}

// Everything the relay retains about a delivery: identifiers, a timestamp,
// a size, and the group id for fan-out traffic. Never ciphertext, never keys.
struct MetadataRecord {
    MetadataEvent event = MetadataEvent::message_relayed;
    std::string sender_id;
    std::string recipient_id;
    std::optional<std::string> group_id;
    std::int64_t timestamp_ms = 0;
    std::uint64_t payload_size = 0;

    bool operator==(const MetadataRecord&) const = default;
};

// One JSON object per line, fields in this exact order.
inline std::string to_json_line(const MetadataRecord& r) {
    nlohmann::ordered_json j;
    j["event"] = to_string(r.event);
    j["sender_id"] = r.sender_id;
    j["recipient_id"] = r.recipient_id;
    j["group_id"] = r.group_id ? nlohmann::ordered_json(*r.group_id) : nlohmann::ordered_json(nullptr);
    j["timestamp_ms"] = r.timestamp_ms;
    j["payload_size"] = r.payload_size;
    return j.dump();
}

inline MetadataRecord metadata_record_from_json(const nlohmann::json& j, std::size_t line_no) {
    auto fail = [&](const std::string& why) -> void {
        throw IoError("ledger line " + std::to_string(line_no) + ": " + why);
    };
    for (const char* field : {"event", "sender_id", "recipient_id", "group_id", "timestamp_ms", "payload_size"})
        if (!j.contains(field)) fail(std::string("missing field '") + field + "'");

    MetadataRecord r;
    try {
        r.event = metadata_event_from_string(j["event"].get<std::string>());
        r.sender_id = j["sender_id"].get<std::string>();
        r.recipient_id = j["recipient_id"].get<std::string>();
        if (!j["group_id"].is_null()) r.group_id = j["group_id"].get<std::string>();
        r.timestamp_ms = j["timestamp_ms"].get<std::int64_t>();
        r.payload_size = j["payload_size"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    } catch (const IoError&) {
        throw IoError("ledger line " + std::to_string(line_no) + ": unknown event value");
    }
    return r;
}

inline std::vector<MetadataRecord> parse_ledger(const std::string& text) {
    std::vector<MetadataRecord> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError("ledger line " + std::to_string(line_no) + ": not valid JSON");
        rows.push_back(metadata_record_from_json(j, line_no));
    }
    return rows;
}

inline std::vector<MetadataRecord> read_ledger_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ledger " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_ledger(buffer.str());
}

}  // namespace ratchetlab
