#include "splitperf/depmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splitperf::depmodel {

void validate(const DepStream& stream) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("dependency stream: invariant violated: " + what);
    };
    if (stream.total_instructions < 1) fail("total_instructions >= 1");
    if (stream.chain_lengths.empty()) fail("at least one chain length");
    long long sum = 0;
    for (long long len : stream.chain_lengths) {
        if (len < 1) fail("chain lengths >= 1");
        if (len > stream.total_instructions) fail("max(chain_lengths) <= total_instructions");
        sum += len;
    }
    if (sum > stream.total_instructions)
        fail("sum(chain_lengths) <= total_instructions");
}

double ratio_of_stream(const DepStream& stream) {
    validate(stream);
    long long longest = *std::max_element(stream.chain_lengths.begin(), stream.chain_lengths.end());
    return static_cast<double>(longest) / static_cast<double>(stream.total_instructions);
}

double ratio_of_split(const kernel::SplitConfig& cfg, int np, bool include_accumulation_depth) {
    kernel::validate_split(cfg, np);
    double longest = cfg.max_length();
    if (include_accumulation_depth && cfg.split_count() > 1)
        longest += std::ceil(std::log2(static_cast<double>(cfg.split_count())));
    return std::min(1.0, longest / static_cast<double>(np));
}

double t_fma(double ratio, const hw::HardwareDescriptor& desc) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw std::invalid_argument("t_fma: ratio must lie in [0, 1], got " +
                                    std::to_string(ratio));
    return ratio * desc.fma_latency_cycles + (1.0 - ratio) * desc.fma_throughput_cycles;
}

ModelEstimate estimate(const kernel::KernelSpec& spec, const kernel::SplitConfig& cfg,
                       const hw::HardwareDescriptor& desc) {
    return estimate_from_ratio(ratio_of_split(cfg, spec.np()), spec, desc);
}

ModelEstimate estimate_from_ratio(double ratio, const kernel::KernelSpec& spec,
                                  const hw::HardwareDescriptor& desc,
                                  std::optional<long long> flops_override) {
    ModelEstimate est;
    est.ratio = ratio;
    est.t_fma_cycles = t_fma(ratio, desc);
    double total_flops =
        static_cast<double>(flops_override ? *flops_override : kernel::flops(spec));
    double n_fma = static_cast<double>(kernel::fma_count(spec, desc));
    est.t_kernel_cycles = n_fma * est.t_fma_cycles;
    est.gflops_per_core = total_flops * desc.frequency_ghz / est.t_kernel_cycles;
    return est;
}

RetroRatio retro_ratio(double measured_gflops, const kernel::KernelSpec& spec,
                       const hw::HardwareDescriptor& desc,
                       std::optional<long long> flops_override) {
    if (!(measured_gflops > 0.0))
        throw std::invalid_argument("retro_ratio: measured GFLOPS must be > 0");
    double denom = desc.fma_latency_cycles - desc.fma_throughput_cycles;
    if (denom == 0.0)
        throw std::invalid_argument(
            "retro_ratio: T_latency == T_throughput leaves the ratio undefined");

    double total_flops =
        static_cast<double>(flops_override ? *flops_override : kernel::flops(spec));
    double t_kernel = total_flops * desc.frequency_ghz / measured_gflops;
    double per_fma = t_kernel / static_cast<double>(kernel::fma_count(spec, desc));

    RetroRatio result;
    result.ratio = (per_fma - desc.fma_throughput_cycles) / denom;
    result.out_of_range = !(result.ratio >= 0.0 && result.ratio <= 1.0);
    return result;
}

}  // namespace splitperf::depmodel
