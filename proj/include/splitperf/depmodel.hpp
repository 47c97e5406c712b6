#pragma once

#include <optional>
#include <vector>

#include "splitperf/hardware.hpp"
#include "splitperf/kernel.hpp"

namespace splitperf::depmodel {

// An instruction stream abstracted to its dependency chains: Ns instructions
// total, of which the listed chains are serially dependent runs. Instructions
// not covered by any chain are independent (chain length 1).
struct DepStream {
    long long total_instructions = 0;
    std::vector<long long> chain_lengths;
};

void validate(const DepStream& stream);

// Fraction of the stream serialized behind the longest dependency chain:
// max(chain_lengths) / Ns. 0 = throughput-bound, 1 = latency-bound.
double ratio_of_stream(const DepStream& stream);

// Dependency ratio of a split configuration with Ns fixed to np. The final
// accumulation chain is not counted; include_accumulation_depth adds
// ceil(log2(N)) to the longest chain for sensitivity studies (capped at 1).
double ratio_of_split(const kernel::SplitConfig& cfg, int np,
                      bool include_accumulation_depth = false);

// Average cycles per FMA: ratio * T_latency + (1 - ratio) * T_throughput.
// Rejects ratio outside [0, 1]; callers clamp explicitly if they want that.
double t_fma(double ratio, const hw::HardwareDescriptor& desc);

struct ModelEstimate {
    double ratio = 0.0;
    double t_fma_cycles = 0.0;
    double t_kernel_cycles = 0.0;
    double gflops_per_core = 0.0;
};

// Full analytical chain: ratio -> per-FMA cycles -> kernel cycles -> GFLOPS.
ModelEstimate estimate(const kernel::KernelSpec& spec, const kernel::SplitConfig& cfg,
                       const hw::HardwareDescriptor& desc);

// Same, with the dependency ratio supplied externally (e.g. by the learner).
ModelEstimate estimate_from_ratio(double ratio, const kernel::KernelSpec& spec,
                                  const hw::HardwareDescriptor& desc,
                                  std::optional<long long> flops_override = std::nullopt);

struct RetroRatio {
    double ratio = 0.0;        // raw value, may fall outside [0, 1]
    bool out_of_range = false;
};

// Invert a GFLOPS measurement back to the dependency ratio:
// T_kernel = flops * f / GFLOPS, T_FMA = T_kernel / N_FMA,
// Ratio = (T_FMA - T_throughput) / (T_latency - T_throughput).
// Out-of-range values are returned raw and flagged; they signal that the
// model's assumptions were violated for this measurement.
RetroRatio retro_ratio(double measured_gflops, const kernel::KernelSpec& spec,
                       const hw::HardwareDescriptor& desc,
                       std::optional<long long> flops_override = std::nullopt);

}  // namespace splitperf::depmodel
