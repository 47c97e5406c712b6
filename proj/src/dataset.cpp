#include "splitperf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "splitperf/csv.hpp"
#include "splitperf/rng.hpp"

namespace splitperf::dataset {

HwRegistry preset_registry() {
    HwRegistry registry;
    for (const auto& name : hw::preset_names()) registry.emplace(name, hw::preset(name));
    return registry;
}

const char* to_string(ExclusionReason reason) {
    return reason == ExclusionReason::RatioRange ? "RATIO_RANGE" : "FOOTPRINT";
}

namespace {

[[noreturn]] void row_fail(const std::string& origin, size_t row, const std::string& column,
                           const std::string& msg) {
    std::ostringstream os;
    os << origin << ": row " << row << ", column '" << column << "': " << msg;
    throw std::runtime_error(os.str());
}

double cell_number(const std::string& origin, size_t row, const std::string& column,
                   const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        row_fail(origin, row, column, "cannot parse number '" + value + "'");
    }
}

long long cell_int(const std::string& origin, size_t row, const std::string& column,
                   const std::string& value) {
    double v = cell_number(origin, row, column, value);
    if (v != std::floor(v)) row_fail(origin, row, column, "expected an integer, got '" + value + "'");
    return static_cast<long long>(v);
}

std::vector<SampleRow> ingest_table(const csv::Table& table, const std::string& origin,
                                    const HwRegistry& registry) {
    int c_hw = table.require_column("hw", origin);
    int c_p = table.require_column("P", origin);
    int c_split = table.require_column("split", origin);
    int c_elements = table.require_column("elements", origin);
    int c_directions = table.require_column("directions", origin);
    int c_gflops = table.require_column("gflops_per_core", origin);
    int c_flops = table.column("flops_override");

    std::vector<SampleRow> rows;
    rows.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        size_t row_no = r + 1;
        SampleRow row;
        row.hw_name = cells[c_hw];
        auto hw_it = registry.find(row.hw_name);
        if (hw_it == registry.end())
            row_fail(origin, row_no, "hw", "unknown hardware name '" + row.hw_name + "'");

        row.polynomial_order = static_cast<int>(cell_int(origin, row_no, "P", cells[c_p]));
        try {
            row.split = kernel::parse_split(cells[c_split]);
            kernel::validate_split(row.split, row.polynomial_order + 1);
        } catch (const std::exception& e) {
            row_fail(origin, row_no, "split", e.what());
        }
        row.elements = cell_int(origin, row_no, "elements", cells[c_elements]);
        row.directions =
            static_cast<int>(cell_int(origin, row_no, "directions", cells[c_directions]));
        row.measured_gflops_per_core =
            cell_number(origin, row_no, "gflops_per_core", cells[c_gflops]);
        if (!(row.measured_gflops_per_core > 0.0))
            row_fail(origin, row_no, "gflops_per_core", "must be > 0");
        if (c_flops >= 0 && !cells[c_flops].empty())
            row.flops_override = cell_int(origin, row_no, "flops_override", cells[c_flops]);

        kernel::KernelSpec spec = row.spec();
        try {
            kernel::validate(spec);
        } catch (const std::exception& e) {
            row_fail(origin, row_no, "P", e.what());
        }
        row.flops = row.flops_override ? *row.flops_override : kernel::flops(spec);
        auto retro = depmodel::retro_ratio(row.measured_gflops_per_core, spec, hw_it->second,
                                           row.flops_override);
        row.target_ratio = retro.ratio;
        row.ratio_out_of_range = retro.out_of_range;
        row.working_set_bytes = kernel::data_footprint_bytes(spec).working_set_bytes;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<SampleRow> ingest_csv(const std::filesystem::path& path, const HwRegistry& registry) {
    return ingest_table(csv::read_file(path), path.string(), registry);
}

std::vector<SampleRow> ingest_csv_text(const std::string& text, const std::string& origin,
                                       const HwRegistry& registry) {
    return ingest_table(csv::parse(text, origin), origin, registry);
}

std::string format_rows_csv(const std::vector<SampleRow>& rows) {
    csv::Table table;
    table.header = {"hw", "P", "split", "elements", "directions", "gflops_per_core"};
    for (const auto& row : rows) {
        table.rows.push_back({row.hw_name, std::to_string(row.polynomial_order),
                              kernel::format_split(row.split), std::to_string(row.elements),
                              std::to_string(row.directions),
                              csv::num(row.measured_gflops_per_core)});
    }
    return csv::format(table);
}

std::optional<ExclusionReason> classify_row(const SampleRow& row, const FilterPolicy& policy,
                                            const HwRegistry& registry) {
    auto hw_it = registry.find(row.hw_name);
    if (hw_it == registry.end())
        throw std::invalid_argument("filter: unknown hardware name '" + row.hw_name + "'");
    // Footprint first: a cache-spilling workload usually also produces
    // out-of-range ratios, and the capacity violation is the root cause.
    if (policy.exclude_footprint) {
        double limit =
            policy.footprint_l1_factor * static_cast<double>(hw_it->second.l1_capacity_bytes);
        if (static_cast<double>(row.working_set_bytes) >= limit)
            return ExclusionReason::Footprint;
    }
    if (policy.exclude_ratio_range &&
        (row.target_ratio < -policy.ratio_tolerance ||
         row.target_ratio > 1.0 + policy.ratio_tolerance))
        return ExclusionReason::RatioRange;
    return std::nullopt;
}

FilterOutcome filter_rows(const std::vector<SampleRow>& rows, const FilterPolicy& policy,
                          const HwRegistry& registry) {
    FilterOutcome outcome;
    for (const auto& row : rows) {
        if (auto reason = classify_row(row, policy, registry)) {
            outcome.excluded.push_back({row, *reason});
        } else {
            SampleRow kept = row;
            kept.target_ratio = std::clamp(kept.target_ratio, 0.0, 1.0);
            outcome.kept.push_back(std::move(kept));
        }
    }
    return outcome;
}

DatasetSplit split_train_test(const std::vector<SampleRow>& rows, double fraction,
                              std::uint64_t seed) {
    if (rows.size() < 5)
        throw std::invalid_argument("split_train_test: need at least 5 rows, got " +
                                    std::to_string(rows.size()));
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_train_test: fraction must lie in (0, 1)");

    std::vector<size_t> order(rows.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    size_t n_train = static_cast<size_t>(
        std::llround(fraction * static_cast<double>(rows.size())));
    n_train = std::clamp<size_t>(n_train, 1, rows.size() - 1);

    std::vector<size_t> train_idx(order.begin(), order.begin() + n_train);
    std::vector<size_t> test_idx(order.begin() + n_train, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    DatasetSplit split;
    split.seed = seed;
    for (size_t i : train_idx) split.train.push_back(rows[i]);
    for (size_t i : test_idx) split.test.push_back(rows[i]);
    return split;
}

std::vector<long long> ratio_histogram(const std::vector<SampleRow>& rows, int bins) {
    if (bins < 1) throw std::invalid_argument("ratio_histogram: bins must be >= 1");
    std::vector<long long> counts(bins, 0);
    for (const auto& row : rows) {
        double r = row.target_ratio;
        if (r < 0.0 || r > 1.0) continue;
        int idx = std::min(bins - 1, static_cast<int>(r * bins));
        ++counts[idx];
    }
    return counts;
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n = {"np",         "flops",      "split_count",
                                      "max_length", "min_length", "mean_length"};
        for (int i = 0; i < kPaddedLengths; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "length_%02d", i);
            n.emplace_back(buf);
        }
        n.insert(n.end(), {"frequency_ghz", "fma_latency_cycles", "fma_throughput_cycles",
                           "fpu_count", "vector_bits", "fp_register_count",
                           "reservation_station_entries"});
        return n;
    }();
    return names;
}

std::vector<double> make_features(const kernel::KernelSpec& spec, const kernel::SplitConfig& cfg,
                                  const hw::HardwareDescriptor& desc) {
    kernel::validate_split(cfg, spec.np());
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> f;
    f.reserve(feature_names().size());
    f.push_back(static_cast<double>(spec.np()));
    f.push_back(static_cast<double>(kernel::flops(spec)));
    f.push_back(static_cast<double>(cfg.split_count()));
    f.push_back(static_cast<double>(cfg.max_length()));
    f.push_back(static_cast<double>(cfg.min_length()));
    f.push_back(static_cast<double>(cfg.sum()) / static_cast<double>(cfg.split_count()));

    std::vector<int> sorted = cfg.lengths;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int i = 0; i < kPaddedLengths; ++i)
        f.push_back(i < static_cast<int>(sorted.size()) ? static_cast<double>(sorted[i]) : 0.0);

    f.push_back(desc.frequency_ghz);
    f.push_back(desc.fma_latency_cycles);
    f.push_back(desc.fma_throughput_cycles);
    f.push_back(static_cast<double>(desc.fpu_count));
    f.push_back(static_cast<double>(desc.vector_bits));
    f.push_back(desc.fp_register_count ? static_cast<double>(*desc.fp_register_count) : kMissing);
    f.push_back(desc.reservation_station_entries
                    ? static_cast<double>(*desc.reservation_station_entries)
                    : kMissing);
    return f;
}

std::vector<double> row_features(const SampleRow& row, const hw::HardwareDescriptor& desc) {
    std::vector<double> f = make_features(row.spec(), row.split, desc);
    if (row.flops_override) f[1] = static_cast<double>(*row.flops_override);
    return f;
}

}  // namespace splitperf::dataset
