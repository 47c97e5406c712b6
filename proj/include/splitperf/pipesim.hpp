#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "splitperf/depmodel.hpp"
#include "splitperf/hardware.hpp"
#include "splitperf/kernel.hpp"

namespace splitperf::pipesim {

// Dependency DAG of one loop iteration's FMA instructions. Node ids are
// topologically ordered: every predecessor id is smaller than the node's.
// loop_carried lists (tail, head) register-reuse pairs: in iteration k+1,
// `head` consumes the value `tail` produced in iteration k, the way a chain's
// accumulator register is reused across loop iterations.
struct InstrDag {
    int node_count = 0;
    std::vector<std::vector<int>> deps;                 // deps[i]: predecessor ids
    std::vector<std::pair<int, int>> loop_carried;      // (tail in iter k, head in iter k+1)
};

void validate(const InstrDag& dag);

enum class Pattern { A, B, C, D, E };

Pattern pattern_from_char(char c);
char to_char(Pattern p);

// Microbenchmark dependency patterns:
//   A: ns independent instructions            (ratio -> 0)
//   B: two chains of ns/2                     (ratio 0.50)
//   C: one chain of 3ns/4, ns/4 independent   (ratio 0.75)
//   D: one chain of ns                        (ratio 1.0)
//   E: chains of 3ns/5 and 2ns/5              (ratio 0.60)
// Throws when ns is not divisible as the shape requires.
InstrDag build_pattern(Pattern p, long long ns);

// The same pattern as an abstract dependency stream (for the analytical model).
depmodel::DepStream pattern_stream(Pattern p, long long ns);

// One serial chain per split length, nodes interleaved round-robin across
// the chains. Accumulation nodes (a binary add tree over the partial sums)
// are excluded by default, matching the analytical model's chain accounting.
InstrDag build_from_split(const kernel::SplitConfig& cfg, int np,
                          bool include_accumulation = false);

struct SimOptions {
    long long iterations = 1;                 // DAG replications (loop trip count)
    bool finite_reservation_station = false;  // out-of-order window of RS entries
    bool record_issue_cycles = true;
};

struct SimResult {
    double total_cycles = 0.0;                // first issue to last retirement
    double avg_cycles_per_instr = 0.0;        // total_cycles / replicated instruction count
    long long instructions = 0;               // node_count * iterations
    std::vector<double> per_instr_issue_cycle;
};

// Greedy in-order-ready dispatch on fpu_count fully pipelined units: each
// unit starts one instruction every fma_throughput_cycles * fpu_count cycles,
// an instruction is ready once every predecessor issued fma_latency_cycles
// earlier, and instructions issue in id order (the next instruction may
// share the cycle when a unit is free). Deterministic, and total cycles are
// monotone under added dependency edges.
//
// With finite_reservation_station set (and the descriptor providing a size),
// issue reorders freely inside a program-order window of that many un-issued
// entries, the way a reservation station of that size would. A stalled
// window head then hides the ready work beyond the window, which is the
// mechanism by which a small reservation station throttles a long stall.
SimResult simulate(const InstrDag& dag, const hw::HardwareDescriptor& desc,
                   const SimOptions& options = {});

}  // namespace splitperf::pipesim
