#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitperf::hw {

// Which memory levels may overlap their transfer times. A64FX-style machines
// overlap L2 with L1 stores and everything with memory; Cascade-Lake-style
// machines serialize L2/L3/Mem transfers and expose an L3 level.
enum class OverlapHypothesis { A64FXStyle, CascadeLakeStyle };

struct BandwidthLevel {
    std::string level;   // "l1", "l2", "l3", "mem"
    double read_gbs = 0.0;
    double write_gbs = 0.0;
};

// A machine description. All cycle quantities are core-pipeline cycles;
// bandwidths are per-socket aggregates (divide by active core count at the
// point of use for per-core figures). Immutable after load.
struct HardwareDescriptor {
    std::string name;
    double frequency_ghz = 0.0;
    double fma_latency_cycles = 0.0;      // result usable after this many cycles
    double fma_throughput_cycles = 0.0;   // average cycles between FMA issues at full utilization
    int fpu_count = 0;
    int vector_bits = 0;                  // 64 selects scalar accounting
    std::optional<int> fp_register_count;
    std::optional<int> reservation_station_entries;
    std::uint64_t l1_capacity_bytes = 0;
    std::vector<BandwidthLevel> bandwidths;   // ordered L1 -> Mem
    OverlapHypothesis overlap_hypothesis = OverlapHypothesis::A64FXStyle;

    // SIMD lanes for double precision.
    int lanes_f64() const { return vector_bits >= 64 ? vector_bits / 64 : 1; }

    // Peak per-core GFLOPS: one FMA (2 flops) per lane per FPU per
    // throughput interval.
    double peak_gflops_per_core() const {
        return frequency_ghz * static_cast<double>(fpu_count) *
               static_cast<double>(lanes_f64()) * 2.0;
    }

    const BandwidthLevel* find_level(std::string_view level) const;
};

const char* to_string(OverlapHypothesis hyp);
OverlapHypothesis overlap_hypothesis_from_string(std::string_view text);

// Throws std::invalid_argument naming the violated invariant.
void validate(const HardwareDescriptor& desc);

// Parse the flat `key = value` descriptor format. `origin` is used in error
// messages (file name or "<string>").
HardwareDescriptor parse_hardware(std::string_view text, std::string_view origin);

HardwareDescriptor load_hardware(const std::filesystem::path& path);
void save_hardware(const HardwareDescriptor& desc, const std::filesystem::path& path);
std::string format_hardware(const HardwareDescriptor& desc);

// Bundled presets: "a64fx" and "xeon-gold-6230". Throws on unknown name.
HardwareDescriptor preset(std::string_view name);
std::vector<std::string> preset_names();
bool is_preset(std::string_view name);

// Resolve a `--hw` argument: preset name first, then filesystem path.
HardwareDescriptor resolve(const std::string& name_or_path);

}  // namespace splitperf::hw
