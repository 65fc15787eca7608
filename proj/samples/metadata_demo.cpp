// What the relay alone can learn: run a seeded workload, throw away all
// ciphertext, and reconstruct groups and contact rankings from the ledger.

#include <iostream>

#include "ratchetlab/ratchetlab.hpp"

using namespace ratchetlab;

int main() {
    SimulationConfig cfg;
    cfg.n_users = 15;
    cfg.n_messages = 400;
    cfg.n_groups = 2;
    cfg.seed = 1;
    cfg.prekeys_per_user = 8;

    SimulationResult sim = run_simulation(cfg);
    std::cout << "ledger rows: " << sim.ledger.size() << " (ciphertext never logged)\n\n";

    auto graph = analysis::build_graph(sim.ledger);
    auto groups = analysis::infer_groups(sim.ledger, analysis::kDefaultGroupWindowMs, 3,
                                         analysis::GroupInferenceMode::blind);

    std::cout << "ground-truth groups:\n";
    for (const auto& g : sim.groups) {
        std::cout << "  " << g.group_id << ":";
        for (const auto& m : g.members) std::cout << " " << m;
        std::cout << "\n";
    }

    std::cout << "\nblind-mode inference (timestamps + sizes only):\n";
    for (const auto& g : groups) {
        std::cout << "  [" << g.supporting_events << " events, confidence " << g.confidence << "]:";
        for (const auto& m : g.members) std::cout << " " << m;
        std::cout << "\n";
    }

    const std::string someone = *graph.nodes.begin();
    std::cout << "\ntop contacts of " << someone << ":\n";
    for (const auto& c : analysis::top_contacts(graph, someone, 5))
        std::cout << "  " << c.user_id << "  " << c.message_count << " msgs, " << c.total_bytes
                  << " bytes\n";
    return 0;
}
