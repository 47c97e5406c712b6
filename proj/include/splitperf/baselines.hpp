#pragma once

#include <optional>

#include "splitperf/hardware.hpp"
#include "splitperf/kernel.hpp"

namespace splitperf::baselines {

// Per-level transfer and in-core cycle counts covering `work_flops` worth of
// work. In-core and L1 times normally come from a static analysis tool; the
// derive_ecm_inputs helper offers a bandwidth-derived substitute.
struct EcmInputs {
    double t_c_ol = 0.0;      // overlapping in-core cycles
    double t_l1_ld = 0.0;
    double t_l1_st = 0.0;
    double t_l2 = 0.0;
    std::optional<double> t_l3_rd;   // Cascade-Lake hypothesis only
    std::optional<double> t_l3_wr;
    double t_mem = 0.0;
    double work_flops = 0.0;
};

void validate(const EcmInputs& inputs, hw::OverlapHypothesis hyp);

// FLOPs per byte over the four state-array passes of one element:
// flops / ((P+1)^3 * 4 * precision_bytes). Operator matrices are assumed
// cache-resident and contribute no traffic.
double arithmetic_intensity(const kernel::KernelSpec& spec);

// min(peak GFLOPS, bandwidth * AI).
double roofline_gflops(double ai_flops_per_byte, double peak_gflops, double mem_bw_gbs);

// Data-transfer component of the ECM model under the given overlap hypothesis:
//   A64FX:        max{ t_l1_ld + max{t_l1_st, t_l2}, t_mem }
//   Cascade Lake: max{t_l1_ld, t_l1_st} + t_l2 + max{t_l3_rd, t_l3_wr} + t_mem
double ecm_transfer_time(const EcmInputs& inputs, hw::OverlapHypothesis hyp);

// T_ECM = max{t_c_ol, transfer}; GFLOPS = work_flops / T_ECM * frequency.
double ecm_gflops(const EcmInputs& inputs, const hw::HardwareDescriptor& desc);

// Bandwidth-derived ECM inputs: transfer cycles are bytes / (per-core
// bandwidth) * frequency with per-core bandwidth = socket bandwidth /
// active_cores, and the in-core time is the FMA stream at full throughput.
EcmInputs derive_ecm_inputs(const kernel::KernelSpec& spec, const hw::HardwareDescriptor& desc,
                            double active_cores = 1.0);

}  // namespace splitperf::baselines
