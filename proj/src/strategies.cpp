#include "bayrn/strategies.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace bayrn {
namespace {

void check_nonempty(const History& h) {
    if (h.empty()) throw std::invalid_argument("strategy: history is empty");
}

// Prefers higher reward; equal rewards go to the older entry.
bool better_reward(const HistoryEntry& e, const HistoryEntry& best) {
    return e.reward > best.reward ||
           (e.reward == best.reward && e.iteration < best.iteration);
}

}  // namespace

StrategyKind StrategyKind::parse(const std::string& text) {
    if (text == "normalized-closest") return {Rule::NormalizedClosest, 1};
    if (text == "infinite-chain") return {Rule::InfiniteChain, 1};
    if (text == "best-only") return {Rule::BestOnly, 1};
    const std::string prefix = "best-of-last-m:";
    if (text.rfind(prefix, 0) == 0) {
        const char* first = text.data() + prefix.size();
        const char* last = text.data() + text.size();
        int m = 0;
        const auto [ptr, ec] = std::from_chars(first, last, m);
        if (ec != std::errc{} || ptr != last || m < 1)
            throw std::invalid_argument("strategy: bad window in '" + text + "'");
        return {Rule::BestOfLastM, m};
    }
    throw std::invalid_argument("strategy: unknown kind '" + text + "'");
}

std::string StrategyKind::name() const {
    switch (rule) {
        case Rule::NormalizedClosest: return "normalized-closest";
        case Rule::InfiniteChain: return "infinite-chain";
        case Rule::BestOnly: return "best-only";
        case Rule::BestOfLastM: return "best-of-last-m:" + std::to_string(window);
    }
    throw std::logic_error("strategy: unreachable kind");
}

int closest_rule(const ParamVec& phi, const History& h, const RunningStats& stats) {
    check_nonempty(h);
    const HistoryEntry* best = &h.front();
    double best_d = normalized_distance(phi, best->phi, stats);
    for (const HistoryEntry& e : h) {
        const double d = normalized_distance(phi, e.phi, stats);
        if (d < best_d || (d == best_d && e.iteration < best->iteration)) {
            best = &e;
            best_d = d;
        }
    }
    return best->iteration;
}

int chain_rule(const History& h) {
    check_nonempty(h);
    int latest = h.front().iteration;
    for (const HistoryEntry& e : h) latest = std::max(latest, e.iteration);
    return latest;
}

int best_rule(const History& h) {
    check_nonempty(h);
    const HistoryEntry* best = &h.front();
    for (const HistoryEntry& e : h)
        if (better_reward(e, *best)) best = &e;
    return best->iteration;
}

int best_of_last_m_rule(const History& h, int m) {
    check_nonempty(h);
    if (m < 1) throw std::invalid_argument("strategy: window must be >= 1");
    const std::size_t w = std::min(static_cast<std::size_t>(m), h.size());
    const HistoryEntry* best = &h[h.size() - w];
    for (std::size_t i = h.size() - w; i < h.size(); ++i)
        if (better_reward(h[i], *best)) best = &h[i];
    return best->iteration;
}

int select_checkpoint(const StrategyKind& kind, const ParamVec& phi,
                      const History& h, const RunningStats& stats) {
    switch (kind.rule) {
        case StrategyKind::Rule::NormalizedClosest:
            return closest_rule(phi, h, stats);
        case StrategyKind::Rule::InfiniteChain:
            return chain_rule(h);
        case StrategyKind::Rule::BestOnly:
            return best_rule(h);
        case StrategyKind::Rule::BestOfLastM:
            return best_of_last_m_rule(h, kind.window);
    }
    throw std::logic_error("strategy: unreachable kind");
}

}  // namespace bayrn
