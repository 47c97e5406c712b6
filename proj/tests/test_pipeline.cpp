#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splitperf/csv.hpp"
#include "splitperf/pipeline.hpp"

using namespace splitperf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Recompute every group MAPE from the report's own rows.
void check_report_self_consistency(const pipeline::CompareReport& report) {
    for (const auto& group : report.groups) {
        std::vector<double> measured, la, roofline, ecm_pred, ecm_truth;
        for (const auto& row : report.rows) {
            if (row.hw_name != group.hw_name || row.polynomial_order != group.polynomial_order)
                continue;
            measured.push_back(row.measured_gflops);
            la.push_back(row.la_gflops);
            roofline.push_back(row.roofline_gflops);
            if (row.ecm_gflops) {
                ecm_pred.push_back(*row.ecm_gflops);
                ecm_truth.push_back(row.measured_gflops);
            }
        }
        REQUIRE(static_cast<long long>(measured.size()) == group.n_rows);
        CHECK(std::abs(gbt::mape(la, measured) - group.mape_la) <= 1e-9);
        CHECK(std::abs(gbt::mape(roofline, measured) - group.mape_roofline) <= 1e-9);
        if (group.mape_ecm)
            CHECK(std::abs(gbt::mape(ecm_pred, ecm_truth) - *group.mape_ecm) <= 1e-9);
    }
}

}  // namespace

TEST_CASE("enumerate listing ranks the finest split first") {
    auto machines = std::vector<hw::HardwareDescriptor>{hw::preset("a64fx")};
    auto rows = pipeline::enumerate_listing(3, kernel::SplitEnumeration::Partitions, machines, 1, 3);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].split.lengths == std::vector<int>{1, 1, 1, 1});
    CHECK(rows[1].split.lengths == std::vector<int>{2, 2});      // ties: fewer splits first
    CHECK(rows[2].split.lengths == std::vector<int>{2, 1, 1});
    CHECK(rows[3].split.lengths == std::vector<int>{3, 1});
    CHECK(rows[4].split.lengths == std::vector<int>{4});

    // GFLOPS strictly ordered descending across distinct ratios.
    for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].gflops[0] >= rows[i].gflops[0]);

    SUBCASE("P=7 has the 22 partition rows") {
        CHECK(pipeline::enumerate_listing(7, kernel::SplitEnumeration::Partitions, machines, 1, 3)
                  .size() == 22);
    }
    SUBCASE("stable across runs") {
        auto again =
            pipeline::enumerate_listing(3, kernel::SplitEnumeration::Partitions, machines, 1, 3);
        CHECK(pipeline::enumerate_csv(again, machines) ==
              pipeline::enumerate_csv(rows, machines));
    }
}

TEST_CASE("ecm inputs files: single record and per-(hw,P) arrays") {
    auto single = pipeline::parse_ecm_inputs(
        R"({"t_c_ol": 5, "t_l1_ld": 1, "t_l1_st": 1, "t_l2": 2, "t_mem": 3, "work_flops": 100})",
        "<test>");
    REQUIRE(single.single.has_value());
    CHECK(single.lookup("anything", 3).has_value());

    auto table = pipeline::parse_ecm_inputs(
        R"([{"hw": "a64fx", "P": 7, "t_c_ol": 5, "t_l1_ld": 1, "t_l1_st": 1, "t_l2": 2,
             "t_mem": 3, "work_flops": 100}])",
        "<test>");
    CHECK(table.lookup("a64fx", 7).has_value());
    CHECK_FALSE(table.lookup("a64fx", 8).has_value());

    CHECK_THROWS_AS(pipeline::parse_ecm_inputs("[{\"t_c_ol\": 1}]", "<test>"),
                    std::runtime_error);
    CHECK_THROWS_AS(pipeline::parse_ecm_inputs("nonsense", "<test>"), std::runtime_error);
}

TEST_CASE("desk pipeline produces a reproducible, self-consistent report") {
    pipeline::DeskOptions options;
    options.seed = 7;
    options.sigma = 0.0;
    options.p_min = 1;
    options.p_max = 4;
    options.elements = {1};
    options.sim_iterations = 16;
    options.search_candidates = 1;
    options.k_folds = 3;
    options.out_dir = fs::temp_directory_path() / "splitperf_desk_small_a";

    auto result = pipeline::desk_pipeline(options);

    SUBCASE("artifacts are written") {
        for (const char* name :
             {"dataset.csv", "rows_kept.csv", "rows_excluded.csv", "model.json", "search.csv",
              "report_rows.csv", "report_summary.csv", "report.txt", "ratio_hist_a64fx.csv",
              "ratio_hist_xeon-gold-6230.csv"}) {
            CHECK(fs::exists(options.out_dir / name));
        }
    }

    SUBCASE("row bookkeeping") {
        // Partitions of np=2..5 on two machines: 2+3+5+7 = 17 per machine.
        CHECK(result.rows.size() == 34);
        CHECK(result.filtered.excluded.empty());  // footprints are tiny at P<=4
        CHECK(result.split.train.size() + result.split.test.size() == 34);
    }

    SUBCASE("report is self-consistent and covers the test rows") {
        check_report_self_consistency(result.report);
        long long test_rows = 0;
        for (const auto& row : result.report.rows) test_rows += row.in_test ? 1 : 0;
        CHECK(test_rows == static_cast<long long>(result.split.test.size()));
    }

    SUBCASE("same seed reproduces the artifacts byte for byte") {
        pipeline::DeskOptions rerun = options;
        rerun.out_dir = fs::temp_directory_path() / "splitperf_desk_small_b";
        pipeline::desk_pipeline(rerun);
        CHECK(slurp(options.out_dir / "dataset.csv") == slurp(rerun.out_dir / "dataset.csv"));
        CHECK(slurp(options.out_dir / "report_rows.csv") ==
              slurp(rerun.out_dir / "report_rows.csv"));
        CHECK(slurp(options.out_dir / "report_summary.csv") ==
              slurp(rerun.out_dir / "report_summary.csv"));
        CHECK(slurp(options.out_dir / "model.json") == slurp(rerun.out_dir / "model.json"));
        fs::remove_all(rerun.out_dir);
    }

    fs::remove_all(options.out_dir);
}

TEST_CASE("compare marks held-out groups as extrapolated and keeps excluded rows") {
    // P=15 on the Xeon exceeds the footprint policy, so its rows never reach
    // training but must still show up in the report.
    pipeline::DeskOptions options;
    options.seed = 11;
    options.sigma = 0.0;
    options.p_min = 13;
    options.p_max = 15;
    options.elements = {1};
    options.sim_iterations = 16;
    options.search_candidates = 1;
    options.k_folds = 3;
    options.out_dir = fs::temp_directory_path() / "splitperf_desk_p15";

    auto result = pipeline::desk_pipeline(options);

    bool excluded_seen = false;
    for (const auto& row : result.report.rows) {
        if (row.hw_name == "xeon-gold-6230" && row.polynomial_order == 15) {
            excluded_seen = true;
            CHECK(row.excluded_from_training);
            CHECK(row.exclusion_reason == "FOOTPRINT");
            CHECK_FALSE(row.in_test);
        }
    }
    CHECK(excluded_seen);

    bool group_seen = false;
    for (const auto& group : result.report.groups) {
        if (group.hw_name == "xeon-gold-6230" && group.polynomial_order == 15) {
            group_seen = true;
            CHECK(group.extrapolated);
            CHECK(group.n_rows == 231);  // p(16) partitions
        }
    }
    CHECK(group_seen);
    check_report_self_consistency(result.report);

    fs::remove_all(options.out_dir);
}

TEST_CASE("compare rejects models without provenance") {
    gbt::GbtModel model;
    model.feature_names = dataset::feature_names();
    CHECK_THROWS_AS(pipeline::compare({}, model, dataset::preset_registry(), {}, {}, 1.0),
                    std::invalid_argument);
}
