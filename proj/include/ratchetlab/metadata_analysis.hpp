#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratchetlab/errors.hpp"
#include "ratchetlab/metadata.hpp"

// Reconstruction of social structure from the relay's metadata ledger alone.
// Every function here consumes MetadataRecord fields and nothing else — there
// is no parameter through which ciphertext or key material could even arrive.
namespace ratchetlab::analysis {

struct EdgeStats {
    std::uint64_t message_count = 0;
    std::uint64_t total_bytes = 0;
    std::int64_t first_ms = 0;
    std::int64_t last_ms = 0;
};

struct ContactGraph {
    std::set<std::string> nodes;
    // directed (sender, recipient) -> aggregates over message_relayed rows
    std::map<std::pair<std::string, std::string>, EdgeStats> edges;
};

inline ContactGraph build_graph(std::span<const MetadataRecord> rows) {
    ContactGraph g;
    for (const MetadataRecord& r : rows) {
        if (r.event != MetadataEvent::message_relayed) continue;
        g.nodes.insert(r.sender_id);
        g.nodes.insert(r.recipient_id);
        EdgeStats& e = g.edges[{r.sender_id, r.recipient_id}];
        if (e.message_count == 0) {
            e.first_ms = r.timestamp_ms;
            e.last_ms = r.timestamp_ms;
        } else {
            e.first_ms = std::min(e.first_ms, r.timestamp_ms);
            e.last_ms = std::max(e.last_ms, r.timestamp_ms);
        }
        e.message_count += 1;
        e.total_bytes += r.payload_size;
    }
    return g;
}

struct ContactRank {
    std::string user_id;
    std::uint64_t message_count = 0;  // both directions
    std::uint64_t total_bytes = 0;
};

// Contacts of `user_id` ranked by messages exchanged in either direction,
// ties broken by byte volume, then lexicographic id. Unknown user: empty.
inline std::vector<ContactRank> top_contacts(const ContactGraph& graph, const std::string& user_id,
                                             std::size_t k) {
    if (k < 1) throw ValidationError("top_contacts: k must be >= 1");
    std::map<std::string, ContactRank> per_contact;
    for (const auto& [key, stats] : graph.edges) {
        const auto& [src, dst] = key;
        std::string other;
        if (src == user_id) other = dst;
        else if (dst == user_id) other = src;
        else continue;
        ContactRank& c = per_contact[other];
        c.user_id = other;
        c.message_count += stats.message_count;
        c.total_bytes += stats.total_bytes;
    }
    std::vector<ContactRank> ranked;
    ranked.reserve(per_contact.size());
    for (auto& [id, c] : per_contact) ranked.push_back(std::move(c));
    std::sort(ranked.begin(), ranked.end(), [](const ContactRank& a, const ContactRank& b) {
        if (a.message_count != b.message_count) return a.message_count > b.message_count;
        if (a.total_bytes != b.total_bytes) return a.total_bytes > b.total_bytes;
        return a.user_id < b.user_id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

struct InferredGroup {
    std::set<std::string> members;
    std::uint64_t supporting_events = 0;
    double confidence = 0.0;  // support / total candidate events; not calibrated
};

enum class GroupInferenceMode { labeled, blind };

inline constexpr std::int64_t kDefaultGroupWindowMs = 2000;
inline constexpr std::uint64_t kGroupSizeSlackBytes = 16;  // block-padding slack

namespace detail {

// A fan-out candidate: consecutive relays from one sender, all within
// window_ms of the first, sizes within the padding slack, distinct recipients.
struct FanOutCluster {
    std::set<std::string> recipients;
    std::int64_t start_ms = 0;
    std::uint64_t base_size = 0;
};

inline std::vector<InferredGroup> finalize(std::map<std::set<std::string>, std::uint64_t>& support,
                                           std::uint64_t total_events) {
    std::vector<InferredGroup> out;
    for (auto& [members, events] : support) {
        InferredGroup g;
        g.members = members;
        g.supporting_events = events;
        g.confidence = total_events == 0 ? 0.0 : static_cast<double>(events) / total_events;
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const InferredGroup& a, const InferredGroup& b) {
        if (a.supporting_events != b.supporting_events) return a.supporting_events > b.supporting_events;
        return a.members < b.members;
    });
    return out;
}

}  // namespace detail

// Group membership recovery. Labeled mode reads the ledger's group ids — the
// upper bound on what the relay knows outright. Blind mode ignores them and
// clusters same-sender relays by time window and payload-size similarity,
// the plain traffic-analysis route. min_size counts the sender.
inline std::vector<InferredGroup> infer_groups(std::span<const MetadataRecord> rows,
                                               std::int64_t window_ms, std::size_t min_size,
                                               GroupInferenceMode mode) {
    if (window_ms <= 0) throw ValidationError("infer_groups: window_ms must be positive");
    if (min_size < 3) throw ValidationError("infer_groups: min_size must be at least 3");

    std::map<std::set<std::string>, std::uint64_t> support;
    std::uint64_t total_events = 0;

    if (mode == GroupInferenceMode::labeled) {
        // One event = one (group, sender, timestamp) fan-out.
        std::map<std::set<std::string>, std::set<std::pair<std::string, std::int64_t>>> events_by_set;
        std::map<std::string, std::set<std::string>> members_by_gid;
        for (const MetadataRecord& r : rows) {
            if (r.event != MetadataEvent::message_relayed || !r.group_id) continue;
            auto& m = members_by_gid[*r.group_id];
            m.insert(r.sender_id);
            m.insert(r.recipient_id);
        }
        for (const MetadataRecord& r : rows) {
            if (r.event != MetadataEvent::message_relayed || !r.group_id) continue;
            const auto& members = members_by_gid[*r.group_id];
            if (members.size() < min_size) continue;
            events_by_set[members].insert({r.sender_id, r.timestamp_ms});
        }
        for (const auto& [members, events] : events_by_set) {
            support[members] = events.size();
            total_events += events.size();
        }
        return detail::finalize(support, total_events);
    }

    // Blind mode: per-sender relay rows in time order, group ids ignored.
    std::map<std::string, std::vector<const MetadataRecord*>> by_sender;
    for (const MetadataRecord& r : rows)
        if (r.event == MetadataEvent::message_relayed) by_sender[r.sender_id].push_back(&r);

    for (auto& [sender, events] : by_sender) {
        std::sort(events.begin(), events.end(), [](const MetadataRecord* a, const MetadataRecord* b) {
            if (a->timestamp_ms != b->timestamp_ms) return a->timestamp_ms < b->timestamp_ms;
            if (a->recipient_id != b->recipient_id) return a->recipient_id < b->recipient_id;
            return a->payload_size < b->payload_size;
        });

        detail::FanOutCluster cluster;
        auto flush = [&] {
            if (cluster.recipients.size() + 1 >= min_size) {
                std::set<std::string> members = cluster.recipients;
                members.insert(sender);
                support[members] += 1;
                total_events += 1;
            }
            cluster = detail::FanOutCluster{};
        };

        for (const MetadataRecord* r : events) {
            std::uint64_t lo = std::min(r->payload_size, cluster.base_size);
            std::uint64_t hi = std::max(r->payload_size, cluster.base_size);
            bool fits = !cluster.recipients.empty() && r->timestamp_ms - cluster.start_ms <= window_ms &&
                        hi - lo <= kGroupSizeSlackBytes && !cluster.recipients.contains(r->recipient_id);
            if (!fits) {
                flush();
                cluster.start_ms = r->timestamp_ms;
                cluster.base_size = r->payload_size;
            }
            cluster.recipients.insert(r->recipient_id);
        }
        flush();
    }
    return detail::finalize(support, total_events);
}

struct ActivityProfile {
    std::string user_id;
    std::array<std::uint64_t, 24> by_hour{};
    std::array<std::uint64_t, 7> by_weekday{};         // 0 = Sunday
    std::map<std::int64_t, std::uint64_t> per_day;     // epoch day -> count
    std::uint64_t total = 0;
};

// Sending activity of one user from relayed rows; histogram sums equal the
// user's relayed-message count by construction.
inline ActivityProfile activity_profile(std::span<const MetadataRecord> rows,
                                        const std::string& user_id, int tz_offset_minutes = 0) {
    ActivityProfile p;
    p.user_id = user_id;
    for (const MetadataRecord& r : rows) {
        if (r.event != MetadataEvent::message_relayed || r.sender_id != user_id) continue;
        std::int64_t local_ms = r.timestamp_ms + static_cast<std::int64_t>(tz_offset_minutes) * 60'000;
        std::int64_t day = local_ms / 86'400'000;
        std::int64_t in_day = local_ms % 86'400'000;
        if (in_day < 0) {  // floor division for pre-epoch stamps
            day -= 1;
            in_day += 86'400'000;
        }
        p.by_hour[static_cast<std::size_t>(in_day / 3'600'000)] += 1;
        p.by_weekday[static_cast<std::size_t>(((day % 7) + 7 + 4) % 7)] += 1;  // epoch day 0 = Thursday
        p.per_day[day] += 1;
        p.total += 1;
    }
    return p;
}

// Deterministic report: same ledger, same bytes out.
inline nlohmann::ordered_json report_json(const ContactGraph& graph,
                                          const std::vector<InferredGroup>& groups,
                                          const std::vector<ActivityProfile>& profiles) {
    nlohmann::ordered_json j;
    j["node_count"] = graph.nodes.size();
    j["edge_count"] = graph.edges.size();

    std::vector<std::pair<std::pair<std::string, std::string>, EdgeStats>> edges(graph.edges.begin(),
                                                                                 graph.edges.end());
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        if (a.second.message_count != b.second.message_count)
            return a.second.message_count > b.second.message_count;
        if (a.second.total_bytes != b.second.total_bytes) return a.second.total_bytes > b.second.total_bytes;
        return a.first < b.first;
    });
    nlohmann::ordered_json top_edges = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < edges.size() && i < 10; ++i) {
        top_edges.push_back({{"from", edges[i].first.first},
                             {"to", edges[i].first.second},
                             {"messages", edges[i].second.message_count},
                             {"bytes", edges[i].second.total_bytes},
                             {"first_ms", edges[i].second.first_ms},
                             {"last_ms", edges[i].second.last_ms}});
    }
    j["top_edges"] = top_edges;

    nlohmann::ordered_json inferred = nlohmann::ordered_json::array();
    for (const auto& g : groups)
        inferred.push_back({{"members", g.members},
                            {"supporting_events", g.supporting_events},
                            {"confidence", g.confidence}});
    j["inferred_groups"] = inferred;

    nlohmann::ordered_json users = nlohmann::ordered_json::array();
    for (const auto& p : profiles) {
        nlohmann::ordered_json day_series = nlohmann::ordered_json::array();
        for (const auto& [day, count] : p.per_day)
            day_series.push_back({{"epoch_day", day}, {"messages", count}});
        users.push_back({{"user_id", p.user_id},
                         {"total_sent", p.total},
                         {"by_hour", p.by_hour},
                         {"by_weekday", p.by_weekday},
                         {"per_day", day_series}});
    }
    j["activity"] = users;
    return j;
}

// Writes <base>.json and <base>.txt; returns the JSON form.
inline nlohmann::ordered_json write_report(const ContactGraph& graph,
                                           const std::vector<InferredGroup>& groups,
                                           const std::vector<ActivityProfile>& profiles,
                                           const std::filesystem::path& base_path);

inline std::string report_text(const ContactGraph& graph, const std::vector<InferredGroup>& groups,
                               const std::vector<ActivityProfile>& profiles) {
    std::string out;
    out += "metadata analysis summary\n";
    out += "=========================\n";
    out += "users seen:      " + std::to_string(graph.nodes.size()) + "\n";
    out += "directed edges:  " + std::to_string(graph.edges.size()) + "\n";
    if (graph.nodes.empty()) out += "(no activity in ledger)\n";

    out += "\ninferred groups (" + std::to_string(groups.size()) + "):\n";
    for (const auto& g : groups) {
        out += "  [";
        bool first = true;
        for (const auto& m : g.members) {
            if (!first) out += ", ";
            out += m;
            first = false;
        }
        char conf[32];
        std::snprintf(conf, sizeof(conf), "%.3f", g.confidence);
        out += "]  events=" + std::to_string(g.supporting_events) + " confidence=" + conf + "\n";
    }

    out += "\nper-user totals:\n";
    for (const auto& p : profiles)
        out += "  " + p.user_id + "  sent=" + std::to_string(p.total) + "\n";
    return out;
}

inline nlohmann::ordered_json write_report(const ContactGraph& graph,
                                           const std::vector<InferredGroup>& groups,
                                           const std::vector<ActivityProfile>& profiles,
                                           const std::filesystem::path& base_path) {
    nlohmann::ordered_json j = report_json(graph, groups, profiles);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write report to " + p.string());
        out << text;
        if (!out.good()) throw IoError("short write to " + p.string());
    };
    std::filesystem::path json_path = base_path;
    json_path += ".json";
    std::filesystem::path text_path = base_path;
    text_path += ".txt";
    write(json_path, j.dump(2) + "\n");
    write(text_path, report_text(graph, groups, profiles));
    return j;
}

}  // namespace ratchetlab::analysis
