#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <filesystem>
#include <fstream>

#include "ratchetlab/metadata_analysis.hpp"
#include "ratchetlab/simulation.hpp"

using namespace ratchetlab;
using namespace ratchetlab::analysis;

namespace {

MetadataRecord relayed(const std::string& from, const std::string& to, std::int64_t ts,
                       std::uint64_t size, std::optional<std::string> gid = std::nullopt) {
    return MetadataRecord{MetadataEvent::message_relayed, from, to, std::move(gid), ts, size};
}

}  // namespace

TEST_CASE("build_graph aggregation") {
    SECTION("empty ledger, empty graph") {
        ContactGraph g = build_graph({});
        CHECK(g.nodes.empty());
        CHECK(g.edges.empty());
    }

    SECTION("exact weights") {
        std::vector<MetadataRecord> rows;
        for (int i = 0; i < 5; ++i) rows.push_back(relayed("+15550000001", "+15550000002", 1000 + i, 100));
        ContactGraph g = build_graph(rows);
        CHECK(g.nodes.size() == 2);
        REQUIRE(g.edges.size() == 1);
        const EdgeStats& e = g.edges.at({"+15550000001", "+15550000002"});
        CHECK(e.message_count == 5);
        CHECK(e.total_bytes == 500);
        CHECK(e.first_ms == 1000);
        CHECK(e.last_ms == 1004);
    }

    SECTION("non-relay events are not edges") {
        std::vector<MetadataRecord> rows = {
            {MetadataEvent::registered, "+15550000001", "+15550000001", std::nullopt, 1, 0},
            {MetadataEvent::bundle_fetched, "+15550000001", "+15550000002", std::nullopt, 2, 0},
            {MetadataEvent::message_delivered, "+15550000001", "+15550000002", std::nullopt, 3, 50},
        };
        CHECK(build_graph(rows).edges.empty());
    }

    SECTION("row order does not matter for graph, groups, or profiles") {
        std::vector<MetadataRecord> rows;
        for (int i = 0; i < 40; ++i)
            rows.push_back(relayed("+1555000000" + std::to_string(i % 4 + 1),
                                   "+1555000000" + std::to_string((i + 1) % 4 + 1), 1000 + i, 10 + i));
        // add a fan-out so group inference has something to find
        rows.push_back(relayed("+15550000001", "+15550000002", 900000, 64));
        rows.push_back(relayed("+15550000001", "+15550000003", 900000, 64));
        rows.push_back(relayed("+15550000001", "+15550000004", 900000, 64));

        ContactGraph before = build_graph(rows);
        auto groups_before = infer_groups(rows, 2000, 3, GroupInferenceMode::blind);
        auto profile_before = activity_profile(rows, "+15550000001");
        REQUIRE(groups_before.size() == 1);

        std::mt19937 shuffle_rng(1234);
        for (int round = 0; round < 5; ++round) {
            std::shuffle(rows.begin(), rows.end(), shuffle_rng);
            ContactGraph after = build_graph(rows);
            CHECK(after.nodes == before.nodes);
            REQUIRE(after.edges.size() == before.edges.size());
            for (const auto& [k, v] : before.edges) {
                CHECK(after.edges.at(k).message_count == v.message_count);
                CHECK(after.edges.at(k).total_bytes == v.total_bytes);
                CHECK(after.edges.at(k).first_ms == v.first_ms);
                CHECK(after.edges.at(k).last_ms == v.last_ms);
            }

            auto groups_after = infer_groups(rows, 2000, 3, GroupInferenceMode::blind);
            REQUIRE(groups_after.size() == groups_before.size());
            CHECK(groups_after[0].members == groups_before[0].members);
            CHECK(groups_after[0].supporting_events == groups_before[0].supporting_events);

            auto profile_after = activity_profile(rows, "+15550000001");
            CHECK(profile_after.by_hour == profile_before.by_hour);
            CHECK(profile_after.per_day == profile_before.per_day);
            CHECK(profile_after.total == profile_before.total);
        }
    }
}

TEST_CASE("top_contacts ranking") {
    std::vector<MetadataRecord> rows;
    for (int i = 0; i < 5; ++i) rows.push_back(relayed("+15550000001", "+15550000002", i, 10));
    rows.push_back(relayed("+15550000001", "+15550000003", 50, 10));
    ContactGraph g = build_graph(rows);

    SECTION("ranked by count") {
        auto ranked = top_contacts(g, "+15550000001", 10);
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].user_id == "+15550000002");
        CHECK(ranked[0].message_count == 5);
        CHECK(ranked[1].user_id == "+15550000003");
        CHECK(ranked[1].message_count == 1);
    }

    SECTION("both directions count") {
        rows.push_back(relayed("+15550000003", "+15550000001", 60, 10));
        rows.push_back(relayed("+15550000003", "+15550000001", 61, 10));
        rows.push_back(relayed("+15550000003", "+15550000001", 62, 10));
        rows.push_back(relayed("+15550000003", "+15550000001", 63, 10));
        rows.push_back(relayed("+15550000003", "+15550000001", 64, 10));
        auto ranked = top_contacts(build_graph(rows), "+15550000001", 10);
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].user_id == "+15550000003");  // 6 vs 5
        CHECK(ranked[0].message_count == 6);
    }

    SECTION("tie on count broken by bytes, then id") {
        std::vector<MetadataRecord> t;
        t.push_back(relayed("+15550000001", "+15550000004", 0, 10));
        t.push_back(relayed("+15550000001", "+15550000002", 1, 99));  // same count, more bytes
        t.push_back(relayed("+15550000001", "+15550000003", 2, 10));  // ties with 04 on bytes too
        auto ranked = top_contacts(build_graph(t), "+15550000001", 10);
        REQUIRE(ranked.size() == 3);
        CHECK(ranked[0].user_id == "+15550000002");
        CHECK(ranked[1].user_id == "+15550000003");  // lexicographic before 04
        CHECK(ranked[2].user_id == "+15550000004");
    }

    SECTION("k larger than contact count returns the full list") {
        CHECK(top_contacts(g, "+15550000001", 1000).size() == 2);
        CHECK(top_contacts(g, "+15550000001", 1).size() == 1);
    }

    SECTION("unknown user yields an empty list") {
        CHECK(top_contacts(g, "+15559999999", 5).empty());
    }

    SECTION("k must be positive") {
        CHECK_THROWS_AS(top_contacts(g, "+15550000001", 0), ValidationError);
    }
}

TEST_CASE("infer_groups") {
    const std::string a = "+15550000001", b = "+15550000002", c = "+15550000003",
                      d = "+15550000004";

    SECTION("pairwise-only traffic yields zero groups") {
        std::vector<MetadataRecord> rows;
        for (int i = 0; i < 30; ++i) rows.push_back(relayed(a, b, i * 5000, 120));
        CHECK(infer_groups(rows, 2000, 3, GroupInferenceMode::blind).empty());
        CHECK(infer_groups(rows, 2000, 3, GroupInferenceMode::labeled).empty());
    }

    SECTION("blind mode recovers a fan-out signature") {
        std::vector<MetadataRecord> rows;
        for (int send = 0; send < 3; ++send) {
            std::int64_t ts = send * 100000;
            rows.push_back(relayed(a, b, ts, 200));
            rows.push_back(relayed(a, c, ts, 200));
            rows.push_back(relayed(a, d, ts + 10, 208));  // within window and slack
        }
        rows.push_back(relayed(a, b, 900000, 200));  // lone pairwise message, no signature

        auto groups = infer_groups(rows, 2000, 3, GroupInferenceMode::blind);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::set<std::string>{a, b, c, d});
        CHECK(groups[0].supporting_events == 3);
        CHECK(groups[0].confidence == 1.0);
    }

    SECTION("size slack separates different payloads") {
        std::vector<MetadataRecord> rows;
        rows.push_back(relayed(a, b, 0, 100));
        rows.push_back(relayed(a, c, 1, 100));
        rows.push_back(relayed(a, d, 2, 400));  // way off: not the same fan-out
        auto groups = infer_groups(rows, 2000, 3, GroupInferenceMode::blind);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::set<std::string>{a, b, c});
    }

    SECTION("labeled mode reads group ids directly") {
        std::vector<MetadataRecord> rows;
        rows.push_back(relayed(a, b, 0, 100, "g1"));
        rows.push_back(relayed(a, c, 0, 100, "g1"));
        rows.push_back(relayed(b, a, 9000, 104, "g1"));
        rows.push_back(relayed(b, c, 9000, 104, "g1"));
        auto groups = infer_groups(rows, 2000, 3, GroupInferenceMode::labeled);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::set<std::string>{a, b, c});
        CHECK(groups[0].supporting_events == 2);  // two fan-out events
    }

    SECTION("parameter validation") {
        CHECK_THROWS_AS(infer_groups({}, 0, 3, GroupInferenceMode::blind), ValidationError);
        CHECK_THROWS_AS(infer_groups({}, 1000, 2, GroupInferenceMode::blind), ValidationError);
    }
}

TEST_CASE("blind inference recovers simulated ground truth exactly") {
    SimulationConfig cfg;
    cfg.n_users = 12;
    cfg.n_messages = 300;
    cfg.n_groups = 2;
    cfg.seed = 99;
    cfg.prekeys_per_user = 8;
    SimulationResult sim = run_simulation(cfg);

    auto inferred = infer_groups(sim.ledger, analysis::kDefaultGroupWindowMs, 3,
                                 GroupInferenceMode::blind);
    std::set<std::set<std::string>> inferred_sets, truth_sets;
    for (const auto& g : inferred) inferred_sets.insert(g.members);
    for (const auto& g : sim.groups) truth_sets.insert(g.members);
    CHECK(inferred_sets == truth_sets);

    // labeled mode agrees
    auto labeled = infer_groups(sim.ledger, analysis::kDefaultGroupWindowMs, 3,
                                GroupInferenceMode::labeled);
    std::set<std::set<std::string>> labeled_sets;
    for (const auto& g : labeled) labeled_sets.insert(g.members);
    CHECK(labeled_sets == truth_sets);
}

TEST_CASE("activity profile") {
    const std::string u = "+15550000001";
    // 1970-01-01 was a Thursday; hour 14 of day 0
    std::vector<MetadataRecord> rows;
    for (int i = 0; i < 10; ++i) rows.push_back(relayed(u, "+15550000002", 14LL * 3600000 + i, 50));

    SECTION("hour binning and conservation") {
        ActivityProfile p = activity_profile(rows, u);
        CHECK(p.total == 10);
        CHECK(p.by_hour[14] == 10);
        for (int h = 0; h < 24; ++h)
            if (h != 14) CHECK(p.by_hour[h] == 0);
        CHECK(p.by_weekday[4] == 10);  // Thursday
        std::uint64_t hour_sum = 0, day_sum = 0;
        for (auto v : p.by_hour) hour_sum += v;
        for (auto v : p.by_weekday) day_sum += v;
        CHECK(hour_sum == p.total);
        CHECK(day_sum == p.total);
        CHECK(p.per_day.at(0) == 10);
    }

    SECTION("timezone offset shifts bins") {
        ActivityProfile p = activity_profile(rows, u, 120);  // UTC+2
        CHECK(p.by_hour[16] == 10);
    }

    SECTION("user absent from ledger gives an all-zero profile") {
        ActivityProfile p = activity_profile(rows, "+15559999999");
        CHECK(p.total == 0);
        CHECK(p.per_day.empty());
    }

    SECTION("receiving does not count as activity") {
        ActivityProfile p = activity_profile(rows, "+15550000002");
        CHECK(p.total == 0);
    }
}

TEST_CASE("report generation is deterministic and re-parses") {
    SimulationConfig cfg;
    cfg.n_users = 8;
    cfg.n_messages = 120;
    cfg.n_groups = 1;
    cfg.seed = 5;
    cfg.prekeys_per_user = 6;

    auto render = [&] {
        SimulationResult sim = run_simulation(cfg);
        ContactGraph g = build_graph(sim.ledger);
        auto groups = infer_groups(sim.ledger, 2000, 3, GroupInferenceMode::blind);
        std::vector<ActivityProfile> profiles;
        for (const auto& node : g.nodes) profiles.push_back(activity_profile(sim.ledger, node));
        return std::make_pair(report_json(g, groups, profiles).dump(2),
                              report_text(g, groups, profiles));
    };

    auto [json1, text1] = render();
    auto [json2, text2] = render();
    CHECK(json1 == json2);
    CHECK(text1 == text2);

    auto parsed = nlohmann::json::parse(json1);
    CHECK(parsed.contains("node_count"));
    CHECK(parsed.contains("top_edges"));
    CHECK(parsed.contains("inferred_groups"));
    CHECK(parsed.contains("activity"));
    CHECK(parsed["top_edges"].size() <= 10);
    CHECK(parsed["node_count"].get<std::size_t>() == 8);

    // empty ledger: a report that states zero activity
    ContactGraph empty;
    auto empty_json = report_json(empty, {}, {});
    CHECK(empty_json["node_count"] == 0);
    CHECK(report_text(empty, {}, {}).find("no activity") != std::string::npos);

    // write_report emits both renderings
    auto base = std::filesystem::temp_directory_path() / "ratchetlab_test" / "report";
    std::filesystem::create_directories(base.parent_path());
    auto written = write_report(empty, {}, {}, base);
    CHECK(written == empty_json);
    std::ifstream jf(base.string() + ".json");
    CHECK(nlohmann::json::parse(jf) == nlohmann::json::parse(empty_json.dump()));
    std::ifstream tf(base.string() + ".txt");
    std::string text((std::istreambuf_iterator<char>(tf)), std::istreambuf_iterator<char>());
    CHECK(text == report_text(empty, {}, {}));
    CHECK_THROWS_AS(write_report(empty, {}, {}, "/nonexistent-dir/report"), IoError);
}

TEST_CASE("ledger parsing errors name the offending line") {
    std::string good = to_json_line(relayed("+15550000001", "+15550000002", 5, 10));

    try {
        parse_ledger(good + "\n{\"event\":\"message_relayed\"}\n");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    try {
        parse_ledger(good + "\nnot json at all\n");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    CHECK_THROWS_AS(
        parse_ledger("{\"event\":\"teleported\",\"sender_id\":\"+15550000001\",\"recipient_id\":"
                     "\"+15550000002\",\"group_id\":null,\"timestamp_ms\":1,\"payload_size\":2}"),
        IoError);

    // exported line round-trips exactly
    auto rows = parse_ledger(good + "\n");
    REQUIRE(rows.size() == 1);
    CHECK(to_json_line(rows[0]) == good);
}
