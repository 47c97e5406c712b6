#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitperf/depmodel.hpp"
#include "splitperf/hardware.hpp"
#include "splitperf/kernel.hpp"

namespace splitperf::dataset {

using HwRegistry = std::map<std::string, hw::HardwareDescriptor>;

HwRegistry preset_registry();

// One measurement joined with its machine: the code-side description, the
// measured per-core GFLOPS, and the retrospectively computed ratio target.
struct SampleRow {
    std::string hw_name;
    int polynomial_order = 1;
    kernel::SplitConfig split;
    long long elements = 1;
    int directions = 3;
    double measured_gflops_per_core = 0.0;
    std::optional<long long> flops_override;

    // Derived on ingest.
    long long flops = 0;
    double target_ratio = 0.0;      // raw retro value; may fall outside [0, 1]
    bool ratio_out_of_range = false;
    std::uint64_t working_set_bytes = 0;

    kernel::KernelSpec spec() const {
        return {polynomial_order, directions, elements, 8};
    }
};

// CSV schema (header required):
//   hw,P,split,elements,directions,gflops_per_core[,flops_override]
// with `split` in N:l1+...+ln form. Rows keep file order.
std::vector<SampleRow> ingest_csv(const std::filesystem::path& path, const HwRegistry& registry);
std::vector<SampleRow> ingest_csv_text(const std::string& text, const std::string& origin,
                                       const HwRegistry& registry);

std::string format_rows_csv(const std::vector<SampleRow>& rows);

enum class ExclusionReason { RatioRange, Footprint };
const char* to_string(ExclusionReason reason);

struct FilterPolicy {
    bool exclude_ratio_range = true;
    double ratio_tolerance = 1e-9;       // slack for float round-trip at the 0/1 boundaries
    bool exclude_footprint = true;
    // A row is dropped when its working set reaches this multiple of the
    // machine's L1. The default keeps workloads that merely brush the
    // capacity and drops those far beyond it.
    double footprint_l1_factor = 2.0;
};

struct ExcludedRow {
    SampleRow row;
    ExclusionReason reason;
};

struct FilterOutcome {
    std::vector<SampleRow> kept;      // target_ratio clamped into [0, 1]
    std::vector<ExcludedRow> excluded;
};

// Exclusion decision for one row; nullopt means the row is kept.
std::optional<ExclusionReason> classify_row(const SampleRow& row, const FilterPolicy& policy,
                                            const HwRegistry& registry);

FilterOutcome filter_rows(const std::vector<SampleRow>& rows, const FilterPolicy& policy,
                          const HwRegistry& registry);

struct DatasetSplit {
    std::vector<SampleRow> train;
    std::vector<SampleRow> test;
    std::uint64_t seed = 0;
};

// Uniform random split, reproducible by seed; requires at least 5 rows.
DatasetSplit split_train_test(const std::vector<SampleRow>& rows, double fraction,
                              std::uint64_t seed);

// Counts per bin over [0, 1]; values outside the range are not counted.
std::vector<long long> ratio_histogram(const std::vector<SampleRow>& rows, int bins);

// Fixed-arity feature vector for the learner. Missing hardware counts are
// encoded as NaN and routed by the trees' default directions.
constexpr int kPaddedLengths = 16;
const std::vector<std::string>& feature_names();
std::vector<double> make_features(const kernel::KernelSpec& spec, const kernel::SplitConfig& cfg,
                                  const hw::HardwareDescriptor& desc);
std::vector<double> row_features(const SampleRow& row, const hw::HardwareDescriptor& desc);

}  // namespace splitperf::dataset
