#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "splitperf/csv.hpp"
#include "splitperf/pipeline.hpp"
#include "splitperf/rng.hpp"

namespace splitperf::pipeline {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kSearchStream = 3;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write artifact: " + path.string());
    out << text;
}

void check_options(const DeskOptions& options) {
    if (options.p_min < 1 || options.p_max < options.p_min)
        throw std::invalid_argument("desk pipeline: need 1 <= p_min <= p_max");
    if (!(options.sigma >= 0.0)) throw std::invalid_argument("desk pipeline: sigma >= 0");
    if (options.elements.empty())
        throw std::invalid_argument("desk pipeline: need at least one elements value");
    if (options.hw_names.empty())
        throw std::invalid_argument("desk pipeline: need at least one hardware name");
    if (options.out_dir.empty())
        throw std::invalid_argument("desk pipeline: out_dir must be set");
}

}  // namespace

std::string generate_desk_dataset_csv(const DeskOptions& options,
                                      const dataset::HwRegistry& registry) {
    Rng noise = Rng::substream(options.seed, kNoiseStream);

    csv::Table table;
    table.header = {"hw", "P", "split", "elements", "directions", "gflops_per_core"};
    for (const auto& hw_name : options.hw_names) {
        const hw::HardwareDescriptor& machine = registry.at(hw_name);
        for (int p = options.p_min; p <= options.p_max; ++p) {
            int np = p + 1;
            for (const auto& cfg :
                 kernel::enumerate_splits(np, kernel::SplitEnumeration::Partitions)) {
                pipesim::InstrDag dag = pipesim::build_from_split(cfg, np);
                pipesim::SimOptions sim_options;
                sim_options.iterations = options.sim_iterations;
                sim_options.record_issue_cycles = false;
                double cpi = pipesim::simulate(dag, machine, sim_options).avg_cycles_per_instr;

                for (long long elements : options.elements) {
                    kernel::KernelSpec spec{p, 3, elements, 8};
                    double gflops = static_cast<double>(kernel::flops(spec)) *
                                    machine.frequency_ghz /
                                    (static_cast<double>(kernel::fma_count(spec, machine)) * cpi);
                    if (options.sigma > 0.0) gflops *= std::exp(options.sigma * noise.normal());
                    table.rows.push_back({hw_name, std::to_string(p), kernel::format_split(cfg),
                                          std::to_string(elements), "3", csv::num(gflops)});
                }
            }
        }
    }
    return csv::format(table);
}

DeskResult desk_pipeline(const DeskOptions& options) {
    check_options(options);
    std::filesystem::create_directories(options.out_dir);

    dataset::HwRegistry registry;
    for (const auto& name : options.hw_names) registry.emplace(name, hw::resolve(name));

    // 1. Simulated measurement campaign, written and re-ingested through the
    //    public CSV schema.
    std::string dataset_csv = generate_desk_dataset_csv(options, registry);
    write_text(options.out_dir / "dataset.csv", dataset_csv);

    DeskResult result;
    result.out_dir = options.out_dir;
    result.rows = dataset::ingest_csv_text(dataset_csv, "desk dataset", registry);

    // 2. Filter and split.
    dataset::FilterPolicy policy;
    result.filtered = dataset::filter_rows(result.rows, policy, registry);
    write_text(options.out_dir / "rows_kept.csv", dataset::format_rows_csv(result.filtered.kept));
    {
        csv::Table excluded;
        excluded.header = {"hw", "P", "split", "elements", "gflops_per_core", "reason"};
        for (const auto& ex : result.filtered.excluded)
            excluded.rows.push_back({ex.row.hw_name, std::to_string(ex.row.polynomial_order),
                                     kernel::format_split(ex.row.split),
                                     std::to_string(ex.row.elements),
                                     csv::num(ex.row.measured_gflops_per_core),
                                     dataset::to_string(ex.reason)});
        write_text(options.out_dir / "rows_excluded.csv", csv::format(excluded));
    }

    std::uint64_t split_seed = Rng::substream(options.seed, kSplitStream).next_u64();
    result.split = dataset::split_train_test(result.filtered.kept, options.train_fraction,
                                             split_seed);

    // 3. Feature matrix for the training rows.
    gbt::FeatureMatrix train_x;
    std::vector<double> train_y;
    for (const auto& row : result.split.train) {
        train_x.push_back(dataset::row_features(row, registry.at(row.hw_name)));
        train_y.push_back(row.target_ratio);
    }

    // 4. Hyperparameter search, then the final fit.
    std::uint64_t search_seed = Rng::substream(options.seed, kSearchStream).next_u64();
    result.search = gbt::random_search(train_x, train_y, gbt::SearchSpace{},
                                       options.search_candidates, options.k_folds, search_seed);
    {
        csv::Table table;
        table.header = {"candidate", "n_trees",   "max_depth", "learning_rate",
                        "min_samples_leaf", "subsample_fraction", "cv_mape"};
        for (size_t i = 0; i < result.search.evaluated.size(); ++i) {
            const auto& cand = result.search.evaluated[i];
            table.rows.push_back({std::to_string(i + 1), std::to_string(cand.config.n_trees),
                                  std::to_string(cand.config.max_depth),
                                  csv::num(cand.config.learning_rate),
                                  std::to_string(cand.config.min_samples_leaf),
                                  csv::num(cand.config.subsample_fraction),
                                  csv::num(cand.cv_mape)});
        }
        write_text(options.out_dir / "search.csv", csv::format(table));
    }

    result.model = gbt::train(train_x, train_y, result.search.best, dataset::feature_names());
    result.model.provenance = gbt::SplitProvenance{split_seed, options.train_fraction};
    gbt::save_model(result.model, options.out_dir / "model.json");

    // 5. Ratio distributions over the kept rows, one histogram per machine.
    for (const auto& hw_name : options.hw_names) {
        std::vector<dataset::SampleRow> machine_rows;
        for (const auto& row : result.filtered.kept)
            if (row.hw_name == hw_name) machine_rows.push_back(row);
        auto counts = dataset::ratio_histogram(machine_rows, options.histogram_bins);
        csv::Table table;
        table.header = {"bin_low", "bin_high", "count"};
        for (int b = 0; b < options.histogram_bins; ++b) {
            double width = 1.0 / options.histogram_bins;
            table.rows.push_back({csv::num(b * width), csv::num((b + 1) * width),
                                  std::to_string(counts[b])});
        }
        write_text(options.out_dir / ("ratio_hist_" + hw_name + ".csv"), csv::format(table));
    }

    // 6. Three-model comparison on the test split (excluded rows stay in the
    //    report, marked).
    EcmSource ecm;
    ecm.kind = EcmSourceKind::Derived;
    ecm.active_cores = options.active_cores;
    result.report = compare(result.rows, result.model, registry, policy, ecm,
                            options.active_cores);
    write_text(options.out_dir / "report_rows.csv", report_rows_csv(result.report));
    write_text(options.out_dir / "report_summary.csv", report_summary_csv(result.report));
    write_text(options.out_dir / "report.txt", report_human(result.report));

    return result;
}

}  // namespace splitperf::pipeline
