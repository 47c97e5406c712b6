#include "splitperf/pipesim.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace splitperf::pipesim {

void validate(const InstrDag& dag) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("instruction dag: invariant violated: " + what);
    };
    if (dag.node_count < 1) fail("node_count >= 1");
    if (dag.deps.size() != static_cast<size_t>(dag.node_count))
        fail("deps size == node_count");
    for (int i = 0; i < dag.node_count; ++i)
        for (int p : dag.deps[i])
            if (p < 0 || p >= i) fail("predecessor ids must be < node id (topological order)");
    for (auto [tail, head] : dag.loop_carried) {
        if (tail < 0 || tail >= dag.node_count || head < 0 || head >= dag.node_count)
            fail("loop_carried ids in range");
    }
}

Pattern pattern_from_char(char c) {
    switch (c) {
        case 'A': case 'a': return Pattern::A;
        case 'B': case 'b': return Pattern::B;
        case 'C': case 'c': return Pattern::C;
        case 'D': case 'd': return Pattern::D;
        case 'E': case 'e': return Pattern::E;
    }
    throw std::invalid_argument(std::string("unknown pattern '") + c + "' (expected A..E)");
}

char to_char(Pattern p) { return static_cast<char>('A' + static_cast<int>(p)); }

namespace {

void require_divisible(long long ns, long long div, char pattern) {
    if (ns < div || ns % div != 0)
        throw std::invalid_argument(std::string("pattern ") + pattern + ": ns=" +
                                    std::to_string(ns) + " must be a positive multiple of " +
                                    std::to_string(div));
}

std::vector<long long> pattern_chains(Pattern p, long long ns) {
    if (ns < 1) throw std::invalid_argument("pattern: ns must be >= 1");
    switch (p) {
        case Pattern::A:
            return std::vector<long long>(ns, 1);
        case Pattern::B:
            require_divisible(ns, 2, 'B');
            return {ns / 2, ns / 2};
        case Pattern::C: {
            require_divisible(ns, 4, 'C');
            std::vector<long long> chains{3 * ns / 4};
            chains.insert(chains.end(), ns / 4, 1);
            return chains;
        }
        case Pattern::D:
            return {ns};
        case Pattern::E:
            require_divisible(ns, 5, 'E');
            return {3 * ns / 5, 2 * ns / 5};
    }
    throw std::logic_error("unreachable");
}

// Chains are interleaved round-robin (c1[0], c2[0], ..., c1[1], c2[1], ...),
// the order a scheduler would emit independent partial sums in, so that
// in-order issue still lets the chains overlap.
InstrDag dag_of_chains(const std::vector<long long>& chains) {
    InstrDag dag;
    long long total = 0;
    long long longest = 0;
    for (long long len : chains) {
        total += len;
        longest = std::max(longest, len);
    }
    dag.node_count = static_cast<int>(total);
    dag.deps.resize(dag.node_count);

    std::vector<int> previous(chains.size(), -1);
    std::vector<int> head(chains.size(), -1);
    int next = 0;
    for (long long layer = 0; layer < longest; ++layer) {
        for (size_t c = 0; c < chains.size(); ++c) {
            if (layer >= chains[c]) continue;
            int node = next++;
            if (previous[c] >= 0) dag.deps[node].push_back(previous[c]);
            if (layer == 0) head[c] = node;
            previous[c] = node;
        }
    }
    for (size_t c = 0; c < chains.size(); ++c)
        dag.loop_carried.emplace_back(previous[c], head[c]);
    return dag;
}

}  // namespace

InstrDag build_pattern(Pattern p, long long ns) {
    return dag_of_chains(pattern_chains(p, ns));
}

depmodel::DepStream pattern_stream(Pattern p, long long ns) {
    depmodel::DepStream stream;
    stream.total_instructions = ns;
    stream.chain_lengths = pattern_chains(p, ns);
    return stream;
}

InstrDag build_from_split(const kernel::SplitConfig& cfg, int np, bool include_accumulation) {
    kernel::validate_split(cfg, np);
    std::vector<long long> chains(cfg.lengths.begin(), cfg.lengths.end());
    InstrDag dag = dag_of_chains(chains);

    if (include_accumulation && cfg.split_count() > 1) {
        // Binary add tree over the chain tails; each add reuses its register
        // across iterations.
        std::vector<int> operands;
        operands.reserve(cfg.split_count());
        for (auto [tail, head] : dag.loop_carried) {
            (void)head;
            operands.push_back(tail);
        }
        while (operands.size() > 1) {
            std::vector<int> next_level;
            for (size_t i = 0; i + 1 < operands.size(); i += 2) {
                int node = dag.node_count++;
                dag.deps.push_back({operands[i], operands[i + 1]});
                dag.loop_carried.emplace_back(node, node);
                next_level.push_back(node);
            }
            if (operands.size() % 2 == 1) next_level.push_back(operands.back());
            operands = std::move(next_level);
        }
    }
    return dag;
}

SimResult simulate(const InstrDag& dag, const hw::HardwareDescriptor& desc,
                   const SimOptions& options) {
    validate(dag);
    if (options.iterations < 1)
        throw std::invalid_argument("simulate: iterations must be >= 1");

    const long long n = dag.node_count;
    const long long iters = options.iterations;
    const long long n_total = n * iters;
    if (n_total > 50'000'000)
        throw std::invalid_argument("simulate: replicated stream too large (" +
                                    std::to_string(n_total) + " instructions)");

    const double latency = desc.fma_latency_cycles;
    const double interval = desc.fma_throughput_cycles * desc.fpu_count;
    const int units = desc.fpu_count;

    // Default discipline is in-order-ready dispatch: only the lowest
    // un-issued instruction is eligible, which is a window of one. The
    // reservation-station mode widens the window to the RS entry count and
    // issues out of order inside it.
    long long rs_size = 1;
    if (options.finite_reservation_station) {
        if (!desc.reservation_station_entries)
            throw std::invalid_argument(
                "simulate: finite reservation station requested but descriptor '" + desc.name +
                "' does not provide reservation_station_entries");
        rs_size = *desc.reservation_station_entries;
    }

    // Successor lists of the template dag (within-iteration edges).
    std::vector<std::vector<int>> succs(n);
    for (int i = 0; i < n; ++i)
        for (int p : dag.deps[i]) succs[p].push_back(i);

    // Template in-degrees; iteration copies after the first add carried edges.
    std::vector<int> base_indeg(n, 0), carried_into(n, 0);
    std::vector<std::vector<int>> carried_out(n);
    for (int i = 0; i < n; ++i) base_indeg[i] = static_cast<int>(dag.deps[i].size());
    for (auto [tail, head] : dag.loop_carried) {
        ++carried_into[head];
        carried_out[tail].push_back(head);
    }

    std::vector<int> remaining(n_total);
    std::vector<double> ready_at(n_total, 0.0);
    for (long long k = 0; k < iters; ++k)
        for (long long i = 0; i < n; ++i)
            remaining[k * n + i] = base_indeg[i] + (k > 0 ? carried_into[i] : 0);

    using Event = std::pair<double, long long>;  // (ready time, id)
    std::priority_queue<Event, std::vector<Event>, std::greater<>> pending;
    for (long long g = 0; g < n_total; ++g)
        if (remaining[g] == 0) pending.emplace(0.0, g);

    std::priority_queue<double, std::vector<double>, std::greater<>> unit_free;
    for (int u = 0; u < units; ++u) unit_free.push(0.0);

    std::set<long long> ready;
    SimResult result;
    result.instructions = n_total;
    if (options.record_issue_cycles) result.per_instr_issue_cycle.assign(n_total, 0.0);

    long long issued = 0;
    long long window_end = std::min<long long>(rs_size, n_total);
    long long occupancy = window_end;  // dispatched but not yet issued
    double t = 0.0;
    double last_retire = 0.0;

    auto on_issue = [&](long long g, double when) {
        double completion = when + latency;
        last_retire = std::max(last_retire, completion);
        if (options.record_issue_cycles) result.per_instr_issue_cycle[g] = when;
        long long k = g / n;
        long long i = g % n;
        auto wake = [&](long long target) {
            ready_at[target] = std::max(ready_at[target], completion);
            if (--remaining[target] == 0) pending.emplace(ready_at[target], target);
        };
        for (int s : succs[i]) wake(k * n + s);
        if (k + 1 < iters)
            for (int head : carried_out[i]) wake((k + 1) * n + head);
    };

    while (issued < n_total) {
        while (!pending.empty() && pending.top().first <= t) {
            ready.insert(pending.top().second);
            pending.pop();
        }

        bool eligible = !ready.empty() && *ready.begin() < window_end;
        if (!eligible) {
            if (pending.empty())
                throw std::logic_error("simulate: stalled with no pending events");
            t = std::max(t, pending.top().first);
            continue;
        }
        if (unit_free.top() > t) {
            t = unit_free.top();
            continue;
        }

        unit_free.pop();
        long long g = *ready.begin();
        ready.erase(ready.begin());
        on_issue(g, t);
        unit_free.push(t + interval);
        ++issued;
        --occupancy;
        while (window_end < n_total && occupancy < rs_size) {
            ++window_end;
            ++occupancy;
        }
    }

    result.total_cycles = last_retire;
    result.avg_cycles_per_instr = last_retire / static_cast<double>(n_total);
    return result;
}

}  // namespace splitperf::pipesim
