#ifndef BAYRN_STRATEGIES_HPP
#define BAYRN_STRATEGIES_HPP

#include "bayrn/param_space.hpp"

#include <string>
#include <vector>

namespace bayrn {

// One completed tuning iteration: where the checkpoint lives, which DR point
// it trained on, and how it scored on the real system.
struct HistoryEntry {
    int iteration = 0;       // 0 is the bootstrap policy
    std::string checkpoint;  // path to the saved policy
    ParamVec phi;
    double reward = 0.0;
    int parent = -1;  // iteration tuned from; -1 for fresh initializations
};

// Append-only, ordered by iteration.
using History = std::vector<HistoryEntry>;

struct StrategyKind {
    enum class Rule { NormalizedClosest, InfiniteChain, BestOnly, BestOfLastM };

    Rule rule = Rule::InfiniteChain;
    int window = 1;  // M, read only by BestOfLastM

    // Accepts "normalized-closest" | "infinite-chain" | "best-only" |
    // "best-of-last-m:M" with integer M >= 1; anything else throws.
    static StrategyKind parse(const std::string& text);
    std::string name() const;
};

// Checkpoint-selection rules. Each returns the iteration of the history entry
// whose policy seeds the next fine-tune; ties break toward the smallest
// iteration.
int closest_rule(const ParamVec& phi, const History& h, const RunningStats& stats);
int chain_rule(const History& h);
int best_rule(const History& h);
int best_of_last_m_rule(const History& h, int m);

int select_checkpoint(const StrategyKind& kind, const ParamVec& phi,
                      const History& h, const RunningStats& stats);

}  // namespace bayrn

#endif  // BAYRN_STRATEGIES_HPP
