// Acceptance suite: end-to-end checks of the toolkit against its pinned
// reference numbers. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "splitperf/baselines.hpp"
#include "splitperf/dataset.hpp"
#include "splitperf/depmodel.hpp"
#include "splitperf/gbt.hpp"
#include "splitperf/kernel.hpp"
#include "splitperf/pipeline.hpp"
#include "splitperf/pipesim.hpp"
#include "splitperf/rng.hpp"

using namespace splitperf;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& text) { g_notes.push_back(text); }

void require(bool ok, const std::string& what) {
    if (!ok) {
        ++g_failures;
        note("check failed: " + what);
    }
}

void criterion(const std::string& name, const std::function<void()>& body) {
    int failures_before = g_failures;
    g_notes.clear();
    auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        ++g_failures;
        note(std::string("exception: ") + e.what());
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
    bool ok = (g_failures == failures_before);
    std::printf("[%s] %-28s (%lld ms)\n", ok ? "PASS" : "FAIL", name.c_str(),
                static_cast<long long>(ms));
    if (!ok)
        for (const auto& line : g_notes) std::printf("       %s\n", line.c_str());
}

long long rounded(double value, int decimals) {
    return std::llround(value * std::pow(10.0, decimals));
}

// ---------------------------------------------------------------------------

void table2_analytical() {
    const std::vector<double> ratios = {0.0, 0.50, 0.75, 1.0, 0.60};
    struct Expect {
        const char* hw;
        std::vector<double> exact;
        std::vector<double> published;   // rounded "Estimated" column
        std::vector<int> decimals;
    };
    const std::vector<Expect> expectations = {
        {"a64fx", {0.50, 4.75, 6.875, 9.0, 5.60}, {0.50, 4.8, 6.9, 9.0, 5.60}, {2, 1, 1, 1, 2}},
        {"xeon-gold-6230",
         {0.50, 2.25, 3.125, 4.0, 2.60},
         {0.50, 2.3, 3.1, 4.0, 2.6},
         {2, 1, 1, 1, 1}},
    };
    for (const auto& expect : expectations) {
        hw::HardwareDescriptor machine = hw::preset(expect.hw);
        for (size_t i = 0; i < ratios.size(); ++i) {
            double t = depmodel::t_fma(ratios[i], machine);
            std::ostringstream what;
            what << expect.hw << " ratio " << ratios[i] << ": t_fma " << t;
            require(std::abs(t - expect.exact[i]) <= 1e-12, what.str() + " (exact)");
            require(rounded(t, expect.decimals[i]) ==
                        rounded(expect.published[i], expect.decimals[i]),
                    what.str() + " (rounded)");
        }
    }
}

void simulator_bracket() {
    struct Bracket {
        pipesim::Pattern pattern;
        double measured, estimated;
    };
    const std::map<std::string, std::vector<Bracket>> table = {
        {"a64fx",
         {{pipesim::Pattern::B, 4.5, 4.8},
          {pipesim::Pattern::C, 6.8, 6.9},
          {pipesim::Pattern::E, 5.4, 5.60}}},
        {"xeon-gold-6230",
         {{pipesim::Pattern::B, 2.0, 2.3},
          {pipesim::Pattern::C, 3.0, 3.1},
          {pipesim::Pattern::E, 2.4, 2.6}}},
    };
    for (const auto& [hw_name, brackets] : table) {
        hw::HardwareDescriptor machine = hw::preset(hw_name);
        for (const auto& bracket : brackets) {
            pipesim::SimOptions options;
            options.iterations = 200;
            options.record_issue_cycles = false;
            double avg = pipesim::simulate(pipesim::build_pattern(bracket.pattern, 20), machine,
                                           options)
                             .avg_cycles_per_instr;
            std::ostringstream what;
            what << hw_name << " pattern " << pipesim::to_char(bracket.pattern) << ": avg "
                 << avg << " outside [" << bracket.measured - 0.3 << ", "
                 << bracket.estimated + 0.3 << "]";
            require(avg >= bracket.measured - 0.3 && avg <= bracket.estimated + 0.3, what.str());
        }
    }
}

void round_trip_identity() {
    for (const auto& hw_name : hw::preset_names()) {
        hw::HardwareDescriptor machine = hw::preset(hw_name);
        for (int p : {1, 7, 15}) {
            kernel::KernelSpec spec{p, 3, 1, 8};
            for (int i = 0; i <= 100; ++i) {
                double r = i / 100.0;
                double gflops =
                    depmodel::estimate_from_ratio(r, spec, machine).gflops_per_core;
                double back = depmodel::retro_ratio(gflops, spec, machine).ratio;
                if (std::abs(back - r) > 1e-9) {
                    std::ostringstream what;
                    what << hw_name << " P=" << p << " r=" << r << " came back as " << back;
                    require(false, what.str());
                }
            }
        }
    }
}

void enumeration_counts() {
    long long expected = 1;
    for (int np = 1; np <= 12; ++np) {
        size_t count =
            kernel::enumerate_splits(np, kernel::SplitEnumeration::Compositions).size();
        require(count == static_cast<size_t>(expected),
                "compositions(" + std::to_string(np) + ") = " + std::to_string(count));
        expected *= 2;
    }
    size_t partitions = kernel::enumerate_splits(8, kernel::SplitEnumeration::Partitions).size();
    require(partitions == 22, "partitions(8) = " + std::to_string(partitions));
}

void ecm_overlap_property() {
    Rng rng(0xec3);
    for (int trial = 0; trial < 1000; ++trial) {
        baselines::EcmInputs in;
        in.work_flops = 1.0;
        in.t_l1_ld = rng.uniform(0.0, 100.0);
        in.t_l1_st = rng.uniform(0.0, 100.0);
        in.t_l2 = rng.uniform(0.0, 100.0);
        in.t_mem = rng.uniform(0.0, 100.0);

        double got = baselines::ecm_transfer_time(in, hw::OverlapHypothesis::A64FXStyle);
        double expected =
            std::max(in.t_l1_ld + std::max(in.t_l1_st, in.t_l2), in.t_mem);
        require(got == expected, "A64FX overlap mismatch at trial " + std::to_string(trial));
    }
    for (int trial = 0; trial < 1000; ++trial) {
        baselines::EcmInputs in;
        in.work_flops = 1.0;
        in.t_l1_ld = rng.uniform(0.0, 100.0);
        in.t_l1_st = rng.uniform(0.0, 100.0);
        in.t_l2 = rng.uniform(0.0, 100.0);
        in.t_l3_rd = rng.uniform(0.0, 100.0);
        in.t_l3_wr = rng.uniform(0.0, 100.0);
        in.t_mem = rng.uniform(0.0, 100.0);

        double got = baselines::ecm_transfer_time(in, hw::OverlapHypothesis::CascadeLakeStyle);
        double expected = std::max(in.t_l1_ld, in.t_l1_st) + in.t_l2 +
                          std::max(*in.t_l3_rd, *in.t_l3_wr) + in.t_mem;
        require(got == expected,
                "Cascade Lake overlap mismatch at trial " + std::to_string(trial));
    }
}

void exclusion_rule() {
    kernel::KernelSpec p15{15, 3, 1, 8};
    std::uint64_t working_set = kernel::data_footprint_bytes(p15).working_set_bytes;
    require(working_set == 65536, "P=15 working set is " + std::to_string(working_set));
    require(working_set > hw::preset("xeon-gold-6230").l1_capacity_bytes,
            "P=15 must exceed the xeon L1");
    require(working_set <= hw::preset("a64fx").l1_capacity_bytes,
            "P=15 must not exceed the a64fx L1");

    // Full desk dataset, noise-free: the filter must drop exactly the
    // (xeon, P=15) rows.
    pipeline::DeskOptions options;
    options.sigma = 0.0;
    options.elements = {1};
    options.sim_iterations = 64;
    dataset::HwRegistry registry = dataset::preset_registry();
    std::string csv_text = pipeline::generate_desk_dataset_csv(options, registry);
    auto rows = dataset::ingest_csv_text(csv_text, "<desk>", registry);
    auto outcome = dataset::filter_rows(rows, {}, registry);

    require(outcome.excluded.size() == 231,
            "expected the 231 (xeon, P=15) rows excluded, got " +
                std::to_string(outcome.excluded.size()));
    for (const auto& ex : outcome.excluded) {
        bool is_xeon_p15 =
            ex.row.hw_name == "xeon-gold-6230" && ex.row.polynomial_order == 15;
        require(is_xeon_p15 && ex.reason == dataset::ExclusionReason::Footprint,
                "unexpected exclusion: " + ex.row.hw_name + " P=" +
                    std::to_string(ex.row.polynomial_order));
        if (!is_xeon_p15) break;
    }
}

std::map<std::pair<std::string, int>, double> test_split_mape(
    const pipeline::CompareReport& report) {
    std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>>
        groups;
    for (const auto& row : report.rows) {
        if (!row.in_test) continue;
        auto& [pred, truth] = groups[{row.hw_name, row.polynomial_order}];
        pred.push_back(row.la_gflops);
        truth.push_back(row.measured_gflops);
    }
    std::map<std::pair<std::string, int>, double> out;
    for (const auto& [key, vectors] : groups)
        out[key] = gbt::mape(vectors.first, vectors.second);
    return out;
}

void desk_run(double sigma, double mape_limit, const fs::path& dir) {
    pipeline::DeskOptions options;
    options.seed = 42;
    options.sigma = sigma;
    options.out_dir = dir;
    auto result = pipeline::desk_pipeline(options);

    auto mape_by_group = test_split_mape(result.report);
    require(mape_by_group.size() >= 20, "expected test coverage across most (hw, P) groups");
    long long test_rows = 0;
    for (const auto& row : result.report.rows) test_rows += row.in_test ? 1 : 0;
    require(test_rows >= 500, "expected >= 500 test rows, got " + std::to_string(test_rows));

    for (const auto& [key, mape] : mape_by_group) {
        if (mape > mape_limit) {
            std::ostringstream what;
            what << "sigma=" << sigma << ": " << key.first << " P=" << key.second
                 << " test MAPE " << mape << "% exceeds " << mape_limit << "%";
            require(false, what.str());
        }
    }
}

void desk_pipeline_learning() {
    fs::path base = fs::temp_directory_path() / "splitperf_acceptance_desk";
    desk_run(0.0, 5.0, base / "sigma0");
    desk_run(0.03, 10.0, base / "sigma3");

    // Analytical and simulated orderings of unsplit vs finest split agree on
    // every (P, hw).
    for (const auto& hw_name : hw::preset_names()) {
        hw::HardwareDescriptor machine = hw::preset(hw_name);
        for (int p = 1; p <= 15; ++p) {
            int np = p + 1;
            kernel::KernelSpec spec{p, 3, 1, 8};
            kernel::SplitConfig unsplit{{np}};
            kernel::SplitConfig finest{std::vector<int>(np, 1)};

            double analytic_unsplit = depmodel::estimate(spec, unsplit, machine).gflops_per_core;
            double analytic_finest = depmodel::estimate(spec, finest, machine).gflops_per_core;

            pipesim::SimOptions sim_options;
            sim_options.iterations = 64;
            sim_options.record_issue_cycles = false;
            auto sim_gflops = [&](const kernel::SplitConfig& cfg) {
                double cpi = pipesim::simulate(pipesim::build_from_split(cfg, np), machine,
                                               sim_options)
                                 .avg_cycles_per_instr;
                return static_cast<double>(kernel::flops(spec)) * machine.frequency_ghz /
                       (static_cast<double>(kernel::fma_count(spec, machine)) * cpi);
            };
            bool analytic_order = analytic_unsplit < analytic_finest;
            bool simulated_order = sim_gflops(unsplit) < sim_gflops(finest);
            if (analytic_order != simulated_order) {
                std::ostringstream what;
                what << hw_name << " P=" << p << ": analytical and simulated orderings differ";
                require(false, what.str());
            }
        }
    }
    fs::remove_all(base);
}

void monotonicity_properties() {
    // t_fma strictly increasing in the ratio.
    for (const auto& hw_name : hw::preset_names()) {
        hw::HardwareDescriptor machine = hw::preset(hw_name);
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            double t = depmodel::t_fma(i / 100.0, machine);
            require(t > prev, hw_name + ": t_fma not strictly increasing at i=" +
                                  std::to_string(i));
            prev = t;
        }
    }

    // Extra dependency edges never reduce total cycles (100 random pairs).
    hw::HardwareDescriptor machine = hw::preset("a64fx");
    Rng rng(0xd46);
    int tested = 0;
    while (tested < 100) {
        int n = static_cast<int>(rng.uniform_int(4, 30));
        pipesim::InstrDag dag;
        dag.node_count = n;
        dag.deps.resize(n);
        for (int i = 1; i < n; ++i)
            if (rng.uniform01() < 0.5)
                dag.deps[i].push_back(static_cast<int>(rng.uniform_int(0, i - 1)));

        int to = static_cast<int>(rng.uniform_int(1, n - 1));
        int from = static_cast<int>(rng.uniform_int(0, to - 1));
        bool present = false;
        for (int p : dag.deps[to]) present = present || (p == from);
        if (present) continue;

        pipesim::InstrDag denser = dag;
        denser.deps[to].push_back(from);
        pipesim::SimOptions options;
        options.iterations = 2;
        options.record_issue_cycles = false;
        double base = pipesim::simulate(dag, machine, options).total_cycles;
        double constrained = pipesim::simulate(denser, machine, options).total_cycles;
        require(constrained >= base - 1e-9,
                "edge addition reduced total cycles at trial " + std::to_string(tested));
        ++tested;
    }

    // Roofline never exceeds the compute peak.
    for (int trial = 0; trial < 1000; ++trial) {
        double ai = rng.uniform(0.0, 10.0);
        double peak = rng.uniform(1.0, 200.0);
        double bw = rng.uniform(1.0, 500.0);
        require(baselines::roofline_gflops(ai, peak, bw) <= peak,
                "roofline exceeded peak at trial " + std::to_string(trial));
    }
}

}  // namespace

int main() {
    std::printf("splitperf acceptance suite\n");
    criterion("table2-analytical", table2_analytical);
    criterion("simulator-bracket", simulator_bracket);
    criterion("round-trip-identity", round_trip_identity);
    criterion("enumeration-counts", enumeration_counts);
    criterion("ecm-overlap-property", ecm_overlap_property);
    criterion("exclusion-rule", exclusion_rule);
    criterion("desk-pipeline-learning", desk_pipeline_learning);
    criterion("monotonicity-properties", monotonicity_properties);

    if (g_failures > 0) {
        std::printf("%d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
