// Command-line surface for the split-performance toolkit. Subcommands mirror
// the library modules; all structured output is CSV or JSON lines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitperf/baselines.hpp"
#include "splitperf/csv.hpp"
#include "splitperf/dataset.hpp"
#include "splitperf/depmodel.hpp"
#include "splitperf/gbt.hpp"
#include "splitperf/hardware.hpp"
#include "splitperf/kernel.hpp"
#include "splitperf/pipeline.hpp"
#include "splitperf/pipesim.hpp"

namespace sp = splitperf;
using nlohmann::ordered_json;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write output file: " + out_path);
    out << text;
}

std::vector<sp::hw::HardwareDescriptor> resolve_machines(const std::vector<std::string>& names) {
    std::vector<sp::hw::HardwareDescriptor> machines;
    if (names.empty()) {
        for (const auto& name : sp::hw::preset_names()) machines.push_back(sp::hw::preset(name));
    } else {
        for (const auto& name : names) machines.push_back(sp::hw::resolve(name));
    }
    return machines;
}

sp::dataset::HwRegistry build_registry(const std::vector<std::string>& extra_hw_files) {
    sp::dataset::HwRegistry registry = sp::dataset::preset_registry();
    for (const auto& path : extra_hw_files) {
        sp::hw::HardwareDescriptor desc = sp::hw::load_hardware(path);
        registry[desc.name] = desc;
    }
    return registry;
}

sp::kernel::SplitEnumeration parse_mode(const std::string& mode) {
    if (mode == "partitions") return sp::kernel::SplitEnumeration::Partitions;
    if (mode == "compositions") return sp::kernel::SplitEnumeration::Compositions;
    throw std::runtime_error("unknown mode '" + mode + "' (partitions|compositions)");
}

int run(int argc, char** argv) {
    CLI::App app{"Dependency-chain performance toolkit for loop-body-split tensor kernels"};
    app.require_subcommand(1);

    // --- enumerate ---------------------------------------------------------
    auto* cmd_enum = app.add_subcommand(
        "enumerate", "Rank split configurations by the analytical model");
    int enum_p = 3;
    std::string enum_mode = "partitions";
    std::vector<std::string> enum_hw;
    long long enum_elements = 1;
    int enum_directions = 3;
    std::string enum_out;
    cmd_enum->add_option("--p", enum_p, "Polynomial order P")->required();
    cmd_enum->add_option("--mode", enum_mode, "partitions|compositions");
    cmd_enum->add_option("--hw", enum_hw, "Hardware preset name or descriptor file (repeatable)");
    cmd_enum->add_option("--elements", enum_elements, "Elements per kernel invocation");
    cmd_enum->add_option("--directions", enum_directions, "Mode products applied");
    cmd_enum->add_option("--out", enum_out, "Output CSV path (default stdout)");

    // --- gen-kernel --------------------------------------------------------
    auto* cmd_gen = app.add_subcommand("gen-kernel", "Emit the split loop-nest source");
    int gen_p = 7;
    std::string gen_split;
    std::string gen_dialect = "fortran";
    std::string gen_out;
    cmd_gen->add_option("--p", gen_p, "Polynomial order P")->required();
    cmd_gen->add_option("--split", gen_split, "Split config N:l1+...+ln")->required();
    cmd_gen->add_option("--dialect", gen_dialect, "fortran|c");
    cmd_gen->add_option("--out", gen_out, "Output path (default stdout)");

    // --- simulate ----------------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "Run the pipeline simulator");
    std::string sim_pattern, sim_split, sim_hw = "a64fx", sim_out;
    long long sim_ns = 0, sim_iters = 1;
    bool sim_finite_rs = false;
    cmd_sim->add_option("--pattern", sim_pattern, "Microbenchmark pattern A..E");
    cmd_sim->add_option("--split", sim_split, "Split config N:l1+...+ln");
    cmd_sim->add_option("--hw", sim_hw, "Hardware preset name or descriptor file");
    cmd_sim->add_option("--ns", sim_ns, "Instruction count for --pattern");
    cmd_sim->add_option("--iters", sim_iters, "Loop iterations (DAG replications)");
    cmd_sim->add_flag("--finite-rs", sim_finite_rs, "Bound the in-flight window by the RS size");
    cmd_sim->add_option("--out", sim_out, "Output path (default stdout)");

    // --- estimate ----------------------------------------------------------
    auto* cmd_est = app.add_subcommand("estimate", "Analytical estimate for a split config");
    int est_p = 7;
    std::string est_split;
    std::vector<std::string> est_hw;
    long long est_elements = 1;
    int est_directions = 3;
    std::string est_out;
    cmd_est->add_option("--p", est_p, "Polynomial order P")->required();
    cmd_est->add_option("--split", est_split, "Split config N:l1+...+ln")->required();
    cmd_est->add_option("--hw", est_hw, "Hardware preset name or descriptor file (repeatable)");
    cmd_est->add_option("--elements", est_elements, "Elements per kernel invocation");
    cmd_est->add_option("--directions", est_directions, "Mode products applied");
    cmd_est->add_option("--out", est_out, "Output path (default stdout)");

    // --- ingest ------------------------------------------------------------
    auto* cmd_ingest = app.add_subcommand("ingest", "Load a measurement CSV and derive targets");
    std::string ingest_data, ingest_out;
    std::vector<std::string> ingest_hw_files;
    bool ingest_filtered = false;
    cmd_ingest->add_option("--data", ingest_data, "Measurement CSV")->required();
    cmd_ingest->add_option("--hw-file", ingest_hw_files, "Extra descriptor files (repeatable)");
    cmd_ingest->add_flag("--apply-filter", ingest_filtered,
                         "Annotate rows with the exclusion decision");
    cmd_ingest->add_option("--out", ingest_out, "Output CSV path (default stdout)");

    // --- train -------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "Train the ratio regressor");
    std::string train_data, train_model;
    std::vector<std::string> train_hw_files;
    std::uint64_t train_seed = 42;
    double train_fraction = 0.8;
    int train_search = 0, train_folds = 3;
    sp::gbt::TrainConfig train_cfg;
    cmd_train->add_option("--data", train_data, "Measurement CSV")->required();
    cmd_train->add_option("--model", train_model, "Model JSON output path")->required();
    cmd_train->add_option("--hw-file", train_hw_files, "Extra descriptor files (repeatable)");
    cmd_train->add_option("--seed", train_seed, "Seed for split/search/training");
    cmd_train->add_option("--fraction", train_fraction, "Training fraction");
    cmd_train->add_option("--search", train_search,
                          "Random-search candidates (0 = use fixed config)");
    cmd_train->add_option("--folds", train_folds, "Cross-validation folds");
    cmd_train->add_option("--trees", train_cfg.n_trees, "Trees (when --search 0)");
    cmd_train->add_option("--depth", train_cfg.max_depth, "Max depth (when --search 0)");
    cmd_train->add_option("--lr", train_cfg.learning_rate, "Learning rate (when --search 0)");
    cmd_train->add_option("--subsample", train_cfg.subsample_fraction,
                          "Subsample fraction (when --search 0)");
    cmd_train->add_option("--min-leaf", train_cfg.min_samples_leaf,
                          "Min samples per leaf (when --search 0)");

    // --- predict -----------------------------------------------------------
    auto* cmd_pred = app.add_subcommand("predict", "Predict ratio and GFLOPS with a model");
    std::string pred_model, pred_split, pred_hw = "a64fx", pred_out;
    int pred_p = 7, pred_directions = 3;
    long long pred_elements = 1;
    cmd_pred->add_option("--model", pred_model, "Model JSON")->required();
    cmd_pred->add_option("--p", pred_p, "Polynomial order P")->required();
    cmd_pred->add_option("--split", pred_split, "Split config N:l1+...+ln")->required();
    cmd_pred->add_option("--hw", pred_hw, "Hardware preset name or descriptor file");
    cmd_pred->add_option("--elements", pred_elements, "Elements per kernel invocation");
    cmd_pred->add_option("--directions", pred_directions, "Mode products applied");
    cmd_pred->add_option("--out", pred_out, "Output path (default stdout)");

    // --- evaluate ----------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("evaluate", "Score a model on its held-out test split");
    std::string eval_model, eval_data, eval_out;
    std::vector<std::string> eval_hw_files;
    cmd_eval->add_option("--model", eval_model, "Model JSON")->required();
    cmd_eval->add_option("--data", eval_data, "Measurement CSV")->required();
    cmd_eval->add_option("--hw-file", eval_hw_files, "Extra descriptor files (repeatable)");
    cmd_eval->add_option("--out", eval_out, "Output CSV path (default stdout)");

    // --- compare -----------------------------------------------------------
    auto* cmd_cmp = app.add_subcommand(
        "compare", "Learning-augmented vs Roofline vs ECM on the test split");
    std::string cmp_model, cmp_data, cmp_ecm_file, cmp_out_dir;
    std::vector<std::string> cmp_hw_files;
    bool cmp_ecm_derive = false;
    double cmp_active_cores = 1.0;
    cmd_cmp->add_option("--model", cmp_model, "Model JSON")->required();
    cmd_cmp->add_option("--data", cmp_data, "Measurement CSV")->required();
    cmd_cmp->add_option("--hw-file", cmp_hw_files, "Extra descriptor files (repeatable)");
    cmd_cmp->add_option("--ecm-inputs", cmp_ecm_file, "ECM inputs JSON (from llvm-mca or OSACA)");
    cmd_cmp->add_flag("--ecm-derive", cmp_ecm_derive,
                      "Derive ECM inputs from descriptor bandwidths");
    cmd_cmp->add_option("--active-cores", cmp_active_cores,
                        "Cores sharing the socket bandwidths");
    cmd_cmp->add_option("--out", cmp_out_dir, "Artifacts directory (default: stdout table)");

    // --- desk-pipeline -----------------------------------------------------
    auto* cmd_desk = app.add_subcommand(
        "desk-pipeline", "Simulator-backed end-to-end dataset/train/compare run");
    sp::pipeline::DeskOptions desk;
    std::string desk_out;
    cmd_desk->add_option("--out", desk_out, "Artifacts directory")->required();
    cmd_desk->add_option("--seed", desk.seed, "Master seed");
    cmd_desk->add_option("--sigma", desk.sigma, "Lognormal noise level");
    cmd_desk->add_option("--p-min", desk.p_min, "Lowest polynomial order");
    cmd_desk->add_option("--p-max", desk.p_max, "Highest polynomial order");
    cmd_desk->add_option("--elements", desk.elements, "Element counts (repeatable)");
    cmd_desk->add_option("--iters", desk.sim_iterations, "Simulator loop iterations");
    cmd_desk->add_option("--candidates", desk.search_candidates, "Random-search candidates");
    cmd_desk->add_option("--folds", desk.k_folds, "Cross-validation folds");
    cmd_desk->add_option("--fraction", desk.train_fraction, "Training fraction");
    cmd_desk->add_option("--active-cores", desk.active_cores,
                         "Cores sharing the socket bandwidths");
    cmd_desk->add_option("--hw", desk.hw_names, "Hardware names (repeatable)");

    CLI11_PARSE(app, argc, argv);

    if (cmd_enum->parsed()) {
        auto machines = resolve_machines(enum_hw);
        auto rows = sp::pipeline::enumerate_listing(enum_p, parse_mode(enum_mode), machines,
                                                    enum_elements, enum_directions);
        emit(sp::pipeline::enumerate_csv(rows, machines), enum_out);
        return 0;
    }

    if (cmd_gen->parsed()) {
        sp::kernel::Dialect dialect;
        if (gen_dialect == "fortran")
            dialect = sp::kernel::Dialect::FortranLike;
        else if (gen_dialect == "c")
            dialect = sp::kernel::Dialect::CLike;
        else
            throw std::runtime_error("unknown dialect '" + gen_dialect + "' (fortran|c)");
        sp::kernel::KernelSpec spec{gen_p, 3, 1, 8};
        emit(sp::kernel::emit_kernel_source(spec, sp::kernel::parse_split(gen_split), dialect),
             gen_out);
        return 0;
    }

    if (cmd_sim->parsed()) {
        if (sim_pattern.empty() == sim_split.empty())
            throw std::runtime_error("simulate needs exactly one of --pattern or --split");
        sp::hw::HardwareDescriptor machine = sp::hw::resolve(sim_hw);

        sp::pipesim::InstrDag dag;
        ordered_json record;
        record["hw"] = machine.name;
        if (!sim_pattern.empty()) {
            if (sim_pattern.size() != 1)
                throw std::runtime_error("pattern must be a single letter A..E");
            if (sim_ns <= 0) throw std::runtime_error("--ns is required with --pattern");
            dag = sp::pipesim::build_pattern(sp::pipesim::pattern_from_char(sim_pattern[0]),
                                             sim_ns);
            record["pattern"] = sim_pattern;
            record["ns"] = sim_ns;
        } else {
            auto cfg = sp::kernel::parse_split(sim_split);
            dag = sp::pipesim::build_from_split(cfg, cfg.sum());
            record["split"] = sp::kernel::format_split(cfg);
            record["ns"] = cfg.sum();
        }

        sp::pipesim::SimOptions options;
        options.iterations = sim_iters;
        options.finite_reservation_station = sim_finite_rs;
        options.record_issue_cycles = false;
        sp::pipesim::SimResult result = sp::pipesim::simulate(dag, machine, options);
        record["iterations"] = sim_iters;
        record["instructions"] = result.instructions;
        record["total_cycles"] = result.total_cycles;
        record["avg_cycles_per_instr"] = result.avg_cycles_per_instr;
        emit(record.dump() + "\n", sim_out);
        return 0;
    }

    if (cmd_est->parsed()) {
        auto machines = resolve_machines(est_hw);
        auto cfg = sp::kernel::parse_split(est_split);
        sp::kernel::KernelSpec spec{est_p, est_directions, est_elements, 8};
        std::string lines;
        for (const auto& machine : machines) {
            auto est = sp::depmodel::estimate(spec, cfg, machine);
            ordered_json record;
            record["hw"] = machine.name;
            record["P"] = est_p;
            record["split"] = sp::kernel::format_split(cfg);
            record["ratio"] = est.ratio;
            record["t_fma_cycles"] = est.t_fma_cycles;
            record["t_kernel_cycles"] = est.t_kernel_cycles;
            record["gflops_per_core"] = est.gflops_per_core;
            lines += record.dump() + "\n";
        }
        emit(lines, est_out);
        return 0;
    }

    if (cmd_ingest->parsed()) {
        auto registry = build_registry(ingest_hw_files);
        auto rows = sp::dataset::ingest_csv(ingest_data, registry);

        sp::csv::Table table;
        table.header = {"hw",    "P",        "split",       "elements",
                        "directions", "gflops_per_core", "flops", "target_ratio",
                        "out_of_range"};
        if (ingest_filtered) table.header.push_back("excluded_reason");

        for (const auto& row : rows) {
            std::vector<std::string> cells{row.hw_name,
                                           std::to_string(row.polynomial_order),
                                           sp::kernel::format_split(row.split),
                                           std::to_string(row.elements),
                                           std::to_string(row.directions),
                                           sp::csv::num(row.measured_gflops_per_core),
                                           std::to_string(row.flops),
                                           sp::csv::num(row.target_ratio),
                                           row.ratio_out_of_range ? "1" : "0"};
            if (ingest_filtered) {
                auto reason = sp::dataset::classify_row(row, {}, registry);
                cells.push_back(reason ? sp::dataset::to_string(*reason) : "");
            }
            table.rows.push_back(std::move(cells));
        }
        emit(sp::csv::format(table), ingest_out);
        return 0;
    }

    if (cmd_train->parsed()) {
        auto registry = build_registry(train_hw_files);
        auto rows = sp::dataset::ingest_csv(train_data, registry);
        auto outcome = sp::dataset::filter_rows(rows, {}, registry);
        auto split = sp::dataset::split_train_test(outcome.kept, train_fraction, train_seed);

        sp::gbt::FeatureMatrix x;
        std::vector<double> y;
        for (const auto& row : split.train) {
            x.push_back(sp::dataset::row_features(row, registry.at(row.hw_name)));
            y.push_back(row.target_ratio);
        }

        sp::gbt::TrainConfig cfg = train_cfg;
        if (train_search > 0) {
            auto search =
                sp::gbt::random_search(x, y, {}, train_search, train_folds, train_seed);
            cfg = search.best;
            std::cout << "search: best cv_mape " << search.best_cv_mape << " with "
                      << cfg.n_trees << " trees, depth " << cfg.max_depth << "\n";
        } else {
            cfg.seed = train_seed;
        }

        auto model = sp::gbt::train(x, y, cfg, sp::dataset::feature_names());
        model.provenance = sp::gbt::SplitProvenance{train_seed, train_fraction};
        sp::gbt::save_model(model, train_model);
        std::cout << "trained " << model.trees.size() << " trees on " << split.train.size()
                  << " rows (" << outcome.excluded.size() << " excluded, "
                  << split.test.size() << " held out); max train error "
                  << model.training_max_abs_error << "\n";
        return 0;
    }

    if (cmd_pred->parsed()) {
        auto model = sp::gbt::load_model(pred_model);
        auto machine = sp::hw::resolve(pred_hw);
        auto cfg = sp::kernel::parse_split(pred_split);
        sp::kernel::KernelSpec spec{pred_p, pred_directions, pred_elements, 8};
        double ratio =
            sp::gbt::predict_ratio(model, sp::dataset::make_features(spec, cfg, machine));
        auto est = sp::depmodel::estimate_from_ratio(ratio, spec, machine);
        ordered_json record;
        record["hw"] = machine.name;
        record["P"] = pred_p;
        record["split"] = sp::kernel::format_split(cfg);
        record["predicted_ratio"] = ratio;
        record["t_fma_cycles"] = est.t_fma_cycles;
        record["gflops_per_core"] = est.gflops_per_core;
        emit(record.dump() + "\n", pred_out);
        return 0;
    }

    if (cmd_eval->parsed()) {
        auto registry = build_registry(eval_hw_files);
        auto model = sp::gbt::load_model(eval_model);
        if (!model.provenance)
            throw std::runtime_error("model carries no split provenance; cannot evaluate");
        auto rows = sp::dataset::ingest_csv(eval_data, registry);
        auto outcome = sp::dataset::filter_rows(rows, {}, registry);
        auto split = sp::dataset::split_train_test(
            outcome.kept, model.provenance->train_fraction, model.provenance->split_seed);

        struct Group {
            std::vector<double> ratio_pred, ratio_truth, gflops_pred, gflops_truth;
        };
        std::map<std::pair<std::string, int>, Group> groups;
        for (const auto& row : split.test) {
            const auto& machine = registry.at(row.hw_name);
            double ratio = sp::gbt::predict_ratio(model, sp::dataset::row_features(row, machine));
            double gflops = sp::depmodel::estimate_from_ratio(ratio, row.spec(), machine,
                                                              row.flops_override)
                                .gflops_per_core;
            Group& g = groups[{row.hw_name, row.polynomial_order}];
            g.ratio_pred.push_back(ratio);
            g.ratio_truth.push_back(std::max(row.target_ratio, 1e-6));
            g.gflops_pred.push_back(gflops);
            g.gflops_truth.push_back(row.measured_gflops_per_core);
        }

        sp::csv::Table table;
        table.header = {"hw", "P", "n_test", "mape_ratio", "mape_gflops"};
        for (const auto& [key, g] : groups) {
            table.rows.push_back({key.first, std::to_string(key.second),
                                  std::to_string(g.ratio_pred.size()),
                                  sp::csv::num(sp::gbt::mape(g.ratio_pred, g.ratio_truth)),
                                  sp::csv::num(sp::gbt::mape(g.gflops_pred, g.gflops_truth))});
        }
        emit(sp::csv::format(table), eval_out);
        return 0;
    }

    if (cmd_cmp->parsed()) {
        auto registry = build_registry(cmp_hw_files);
        auto model = sp::gbt::load_model(cmp_model);
        auto rows = sp::dataset::ingest_csv(cmp_data, registry);

        sp::pipeline::EcmSource ecm;
        if (cmp_ecm_derive) {
            ecm.kind = sp::pipeline::EcmSourceKind::Derived;
            ecm.active_cores = cmp_active_cores;
        } else if (!cmp_ecm_file.empty()) {
            ecm.kind = sp::pipeline::EcmSourceKind::File;
            ecm.file = sp::pipeline::load_ecm_inputs(cmp_ecm_file);
        }

        auto report =
            sp::pipeline::compare(rows, model, registry, {}, ecm, cmp_active_cores);
        if (cmp_out_dir.empty()) {
            std::cout << sp::pipeline::report_human(report);
        } else {
            std::filesystem::create_directories(cmp_out_dir);
            std::filesystem::path dir(cmp_out_dir);
            std::ofstream(dir / "report_rows.csv") << sp::pipeline::report_rows_csv(report);
            std::ofstream(dir / "report_summary.csv") << sp::pipeline::report_summary_csv(report);
            std::ofstream(dir / "report.txt") << sp::pipeline::report_human(report);
        }
        return 0;
    }

    if (cmd_desk->parsed()) {
        desk.out_dir = desk_out;
        auto result = sp::pipeline::desk_pipeline(desk);
        std::cout << "desk pipeline: " << result.rows.size() << " rows ("
                  << result.filtered.excluded.size() << " excluded), model with "
                  << result.model.trees.size() << " trees, artifacts in "
                  << result.out_dir.string() << "\n";
        std::cout << sp::pipeline::report_human(result.report);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "splitperf: " << e.what() << "\n";
        return 1;
    }
}
