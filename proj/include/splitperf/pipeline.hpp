#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitperf/baselines.hpp"
#include "splitperf/dataset.hpp"
#include "splitperf/gbt.hpp"
#include "splitperf/pipesim.hpp"

namespace splitperf::pipeline {

// ---------------------------------------------------------------------------
// Split enumeration with analytical estimates, ranked best-first.
// ---------------------------------------------------------------------------

struct EnumerateRow {
    kernel::SplitConfig split;
    double ratio = 0.0;
    std::vector<double> gflops;           // parallel to the machine list
};

// Sorted by estimated GFLOPS descending (equivalently ratio ascending, the
// ordering is machine-independent); ties: fewer splits, then lexicographic
// lengths.
std::vector<EnumerateRow> enumerate_listing(int polynomial_order, kernel::SplitEnumeration mode,
                                            const std::vector<hw::HardwareDescriptor>& machines,
                                            long long elements, int directions);

std::string enumerate_csv(const std::vector<EnumerateRow>& rows,
                          const std::vector<hw::HardwareDescriptor>& machines);

// ---------------------------------------------------------------------------
// ECM input files: a JSON array of records, each carrying "hw", "P" and the
// EcmInputs fields; a single bare object (no hw/P) applies everywhere.
// ---------------------------------------------------------------------------

struct EcmInputsFile {
    std::map<std::pair<std::string, int>, baselines::EcmInputs> by_hw_p;
    std::optional<baselines::EcmInputs> single;

    std::optional<baselines::EcmInputs> lookup(const std::string& hw_name, int p) const;
};

EcmInputsFile load_ecm_inputs(const std::filesystem::path& path);
EcmInputsFile parse_ecm_inputs(const std::string& text, const std::string& origin);

enum class EcmSourceKind { None, File, Derived };

struct EcmSource {
    EcmSourceKind kind = EcmSourceKind::None;
    EcmInputsFile file;               // kind == File
    double active_cores = 1.0;        // kind == Derived
};

// ---------------------------------------------------------------------------
// Three-model comparison report.
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string hw_name;
    int polynomial_order = 1;
    kernel::SplitConfig split;
    long long elements = 1;
    int directions = 3;
    double measured_gflops = 0.0;
    double la_gflops = 0.0;            // learning-augmented
    double roofline_gflops = 0.0;
    std::optional<double> ecm_gflops;  // absent when no ECM source covers the row
    bool in_test = false;
    bool excluded_from_training = false;
    std::string exclusion_reason;      // empty unless excluded
};

struct CompareGroup {
    std::string hw_name;
    int polynomial_order = 1;
    long long n_rows = 0;
    double mape_la = 0.0;
    double mape_roofline = 0.0;
    std::optional<double> mape_ecm;
    bool extrapolated = false;         // no training row shares this (hw, P)
};

struct CompareReport {
    std::vector<CompareRow> rows;      // test-split rows plus excluded rows
    std::vector<CompareGroup> groups;  // per (hw, P), MAPE over the rows above
};

// Rebuilds the model's train/test partition from its recorded provenance,
// then scores the test rows (plus the filtered-out rows, which stay in the
// report for analysis) against all three models.
CompareReport compare(const std::vector<dataset::SampleRow>& all_rows, const gbt::GbtModel& model,
                      const dataset::HwRegistry& registry, const dataset::FilterPolicy& policy,
                      const EcmSource& ecm, double roofline_active_cores = 1.0);

std::string report_rows_csv(const CompareReport& report);
std::string report_summary_csv(const CompareReport& report);
std::string report_human(const CompareReport& report);

// ---------------------------------------------------------------------------
// Desk-scale end-to-end pipeline: simulator-generated dataset, ingest,
// filter, hyperparameter search, training, comparison report. Everything is
// derived from `seed`; two runs with the same options produce byte-identical
// artifacts.
// ---------------------------------------------------------------------------

struct DeskOptions {
    std::uint64_t seed = 42;
    double sigma = 0.03;               // lognormal noise on simulated GFLOPS
    int p_min = 1;
    int p_max = 15;
    std::vector<long long> elements = {1, 10, 100};
    long long sim_iterations = 64;
    int search_candidates = 4;
    int k_folds = 3;
    double train_fraction = 0.8;
    double active_cores = 1.0;         // per-core bandwidth divisor for baselines
    int histogram_bins = 20;
    std::vector<std::string> hw_names = {"a64fx", "xeon-gold-6230"};
    std::filesystem::path out_dir;     // artifacts directory, created if needed
};

struct DeskResult {
    std::vector<dataset::SampleRow> rows;       // ingested synthetic dataset
    dataset::FilterOutcome filtered;
    dataset::DatasetSplit split;
    gbt::SearchResult search;
    gbt::GbtModel model;
    CompareReport report;
    std::filesystem::path out_dir;
};

// Simulated measurement table in the ingest CSV schema.
std::string generate_desk_dataset_csv(const DeskOptions& options,
                                      const dataset::HwRegistry& registry);

DeskResult desk_pipeline(const DeskOptions& options);

}  // namespace splitperf::pipeline
