#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args) {
    const char* binary = std::getenv("SPLITPERF_CLI");
    REQUIRE_MESSAGE(binary != nullptr, "SPLITPERF_CLI must point at the splitperf binary");

    fs::path out_file = fs::temp_directory_path() / "splitperf_cli_out.txt";
    fs::path err_file = fs::temp_directory_path() / "splitperf_cli_err.txt";
    std::string command = std::string(binary) + " " + args + " >" + out_file.string() + " 2>" +
                          err_file.string();
    int status = std::system(command.c_str());

    CliResult result;
    result.exit_code = WEXITSTATUS(status);
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    fs::remove(out_file);
    fs::remove(err_file);
    return result;
}

size_t count_lines(const std::string& text) {
    size_t n = 0;
    for (char c : text) n += (c == '\n');
    return n;
}

}  // namespace

TEST_CASE("enumerate emits the ranked CSV") {
    auto result = run_cli("enumerate --p 3 --hw a64fx");
    CHECK(result.exit_code == 0);
    CHECK(count_lines(result.out) == 6);  // header + p(4) partitions
    CHECK(result.out.find("1,4:1+1+1+1,") != std::string::npos);
    CHECK(result.out.find("a64fx_gflops") != std::string::npos);
}

TEST_CASE("gen-kernel emits the split loop body") {
    auto result = run_cli("gen-kernel --p 7 --split 3:3+3+2");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("tmp3") != std::string::npos);
    CHECK(result.out.find("q_tmp(i,j,k) = tmp1 + tmp2 + tmp3") != std::string::npos);
}

TEST_CASE("simulate reports pattern D at the latency") {
    auto result = run_cli("simulate --pattern D --ns 20 --iters 10 --hw a64fx");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("\"avg_cycles_per_instr\":9.0") != std::string::npos);
    CHECK(count_lines(result.out) == 1);
}

TEST_CASE("estimate reports the analytical numbers") {
    auto result = run_cli("estimate --p 7 --split 1:8 --hw a64fx");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("\"t_kernel_cycles\":13824.0") != std::string::npos);
    CHECK(result.out.find("\"ratio\":1.0") != std::string::npos);
}

TEST_CASE("errors exit nonzero with a single-line diagnostic") {
    auto result = run_cli("simulate --pattern D --split 2:2+2 --ns 10");
    CHECK(result.exit_code != 0);
    CHECK(result.out.empty());
    CHECK(count_lines(result.err) == 1);
    CHECK(result.err.find("splitperf:") != std::string::npos);

    auto bad_hw = run_cli("estimate --p 3 --split 1:4 --hw warp-drive");
    CHECK(bad_hw.exit_code != 0);
    CHECK(count_lines(bad_hw.err) == 1);
}

TEST_CASE("ingest/train/predict/evaluate round trip on a tiny dataset") {
    fs::path dir = fs::temp_directory_path() / "splitperf_cli_flow";
    fs::create_directories(dir);
    fs::path data = dir / "tiny.csv";

    // Simulator-free synthetic measurements: exact analytical values.
    {
        auto desk = run_cli("desk-pipeline --out " + (dir / "desk").string() +
                            " --seed 3 --sigma 0 --p-min 1 --p-max 3 --elements 1 "
                            "--iters 8 --candidates 1 --folds 2");
        REQUIRE(desk.exit_code == 0);
        fs::copy_file(dir / "desk" / "dataset.csv", data,
                      fs::copy_options::overwrite_existing);
    }

    auto ingest = run_cli("ingest --data " + data.string() + " --apply-filter");
    CHECK(ingest.exit_code == 0);
    CHECK(ingest.out.find("target_ratio") != std::string::npos);

    fs::path model = dir / "model.json";
    auto train = run_cli("train --data " + data.string() + " --model " + model.string() +
                         " --seed 5 --trees 80 --depth 4");
    CHECK(train.exit_code == 0);
    CHECK(fs::exists(model));

    auto predict = run_cli("predict --model " + model.string() + " --p 3 --split 1:4 --hw a64fx");
    CHECK(predict.exit_code == 0);
    CHECK(predict.out.find("predicted_ratio") != std::string::npos);

    auto evaluate = run_cli("evaluate --model " + model.string() + " --data " + data.string());
    CHECK(evaluate.exit_code == 0);
    CHECK(evaluate.out.find("mape_gflops") != std::string::npos);

    auto compare = run_cli("compare --model " + model.string() + " --data " + data.string() +
                           " --ecm-derive");
    CHECK(compare.exit_code == 0);
    CHECK(compare.out.find("MAPE") != std::string::npos);

    fs::remove_all(dir);
}
