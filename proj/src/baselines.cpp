#include "splitperf/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace splitperf::baselines {

void validate(const EcmInputs& inputs, hw::OverlapHypothesis hyp) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("ecm inputs: " + what);
    };
    for (double v : {inputs.t_c_ol, inputs.t_l1_ld, inputs.t_l1_st, inputs.t_l2, inputs.t_mem})
        if (!(v >= 0.0)) fail("cycle times must be >= 0");
    if (!(inputs.work_flops > 0.0)) fail("work_flops must be > 0");
    bool has_l3 = inputs.t_l3_rd.has_value() && inputs.t_l3_wr.has_value();
    if (hyp == hw::OverlapHypothesis::CascadeLakeStyle) {
        if (!has_l3) fail("t_l3_rd and t_l3_wr are required for the Cascade Lake hypothesis");
        if (!(*inputs.t_l3_rd >= 0.0) || !(*inputs.t_l3_wr >= 0.0))
            fail("cycle times must be >= 0");
    } else if (inputs.t_l3_rd || inputs.t_l3_wr) {
        fail("t_l3 fields are only meaningful under the Cascade Lake hypothesis");
    }
}

double arithmetic_intensity(const kernel::KernelSpec& spec) {
    kernel::KernelSpec one = spec;
    one.elements = 1;
    double np = static_cast<double>(spec.np());
    double bytes = np * np * np * 4.0 * spec.precision_bytes;
    return static_cast<double>(kernel::flops(one)) / bytes;
}

double roofline_gflops(double ai_flops_per_byte, double peak_gflops, double mem_bw_gbs) {
    if (!(peak_gflops > 0.0) || !(mem_bw_gbs > 0.0) || !(ai_flops_per_byte >= 0.0))
        throw std::invalid_argument("roofline: peak and bandwidth must be > 0, AI >= 0");
    return std::min(peak_gflops, mem_bw_gbs * ai_flops_per_byte);
}

double ecm_transfer_time(const EcmInputs& inputs, hw::OverlapHypothesis hyp) {
    validate(inputs, hyp);
    if (hyp == hw::OverlapHypothesis::A64FXStyle)
        return std::max(inputs.t_l1_ld + std::max(inputs.t_l1_st, inputs.t_l2), inputs.t_mem);
    return std::max(inputs.t_l1_ld, inputs.t_l1_st) + inputs.t_l2 +
           std::max(*inputs.t_l3_rd, *inputs.t_l3_wr) + inputs.t_mem;
}

double ecm_gflops(const EcmInputs& inputs, const hw::HardwareDescriptor& desc) {
    double t_ecm = std::max(inputs.t_c_ol, ecm_transfer_time(inputs, desc.overlap_hypothesis));
    if (!(t_ecm > 0.0)) throw std::invalid_argument("ecm: T_ECM must be > 0");
    return inputs.work_flops / t_ecm * desc.frequency_ghz;
}

EcmInputs derive_ecm_inputs(const kernel::KernelSpec& spec, const hw::HardwareDescriptor& desc,
                            double active_cores) {
    if (!(active_cores >= 1.0))
        throw std::invalid_argument("derive_ecm_inputs: active_cores must be >= 1");

    kernel::Footprint fp = kernel::data_footprint_bytes(spec);
    double read_bytes = static_cast<double>(fp.traffic_bytes) / 2.0 * spec.elements;
    double write_bytes = read_bytes;

    auto cycles = [&](double bytes, double socket_bw_gbs) {
        double per_core_bw = socket_bw_gbs / active_cores;
        return bytes / per_core_bw * desc.frequency_ghz;
    };

    const auto* l1 = desc.find_level("l1");
    const auto* l2 = desc.find_level("l2");
    const auto* l3 = desc.find_level("l3");
    const auto* mem = desc.find_level("mem");

    EcmInputs inputs;
    inputs.work_flops = static_cast<double>(kernel::flops(spec));
    inputs.t_c_ol =
        static_cast<double>(kernel::fma_count(spec, desc)) * desc.fma_throughput_cycles;
    inputs.t_l1_ld = cycles(read_bytes, l1->read_gbs);
    inputs.t_l1_st = cycles(write_bytes, l1->write_gbs);
    inputs.t_l2 = cycles(read_bytes, l2->read_gbs) + cycles(write_bytes, l2->write_gbs);
    if (desc.overlap_hypothesis == hw::OverlapHypothesis::CascadeLakeStyle) {
        inputs.t_l3_rd = cycles(read_bytes, l3->read_gbs);
        inputs.t_l3_wr = cycles(write_bytes, l3->write_gbs);
    }
    inputs.t_mem = cycles(read_bytes, mem->read_gbs) + cycles(write_bytes, mem->write_gbs);
    return inputs;
}

}  // namespace splitperf::baselines
