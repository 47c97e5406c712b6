#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "splitperf/hardware.hpp"

using namespace splitperf;

TEST_CASE("a64fx preset carries the published machine parameters") {
    hw::HardwareDescriptor d = hw::preset("a64fx");
    CHECK(d.frequency_ghz == doctest::Approx(2.2));
    CHECK(d.fma_latency_cycles == 9.0);
    CHECK(d.fma_throughput_cycles == 0.5);
    CHECK(d.fpu_count == 2);
    CHECK(d.vector_bits == 512);
    CHECK(d.fp_register_count == 128);
    CHECK(d.reservation_station_entries == 40);
    CHECK(d.l1_capacity_bytes == 64 * 1024);
    CHECK(d.overlap_hypothesis == hw::OverlapHypothesis::A64FXStyle);
    CHECK(d.lanes_f64() == 8);
    CHECK(d.peak_gflops_per_core() == doctest::Approx(70.4));
}

TEST_CASE("xeon-gold-6230 preset carries the published machine parameters") {
    hw::HardwareDescriptor d = hw::preset("xeon-gold-6230");
    CHECK(d.frequency_ghz == doctest::Approx(2.0));
    CHECK(d.fma_latency_cycles == 4.0);
    CHECK(d.fma_throughput_cycles == 0.5);
    CHECK(d.fpu_count == 2);
    CHECK(d.vector_bits == 512);
    CHECK(d.fp_register_count == 168);
    CHECK(d.reservation_station_entries == 97);
    CHECK(d.l1_capacity_bytes == 32 * 1024);
    CHECK(d.overlap_hypothesis == hw::OverlapHypothesis::CascadeLakeStyle);
    CHECK(d.find_level("l3") != nullptr);
}

TEST_CASE("validation rejects latency below throughput") {
    hw::HardwareDescriptor d = hw::preset("a64fx");
    d.fma_latency_cycles = 0.4;  // throughput stays 0.5
    CHECK_THROWS_WITH_AS(hw::validate(d),
                         doctest::Contains("fma_latency_cycles >= fma_throughput_cycles"),
                         std::invalid_argument);
}

TEST_CASE("validation names the violated invariant") {
    hw::HardwareDescriptor d = hw::preset("a64fx");

    SUBCASE("zero frequency") {
        d.frequency_ghz = 0.0;
        CHECK_THROWS_WITH_AS(hw::validate(d), doctest::Contains("frequency_ghz"),
                             std::invalid_argument);
    }
    SUBCASE("bad vector width") {
        d.vector_bits = 384;
        CHECK_THROWS_WITH_AS(hw::validate(d), doctest::Contains("vector_bits"),
                             std::invalid_argument);
    }
    SUBCASE("nonpositive bandwidth") {
        d.bandwidths[1].write_gbs = 0.0;
        CHECK_THROWS_WITH_AS(hw::validate(d), doctest::Contains("bandwidths > 0"),
                             std::invalid_argument);
    }
    SUBCASE("l3 only allowed under the Cascade Lake hypothesis") {
        d.bandwidths.insert(d.bandwidths.begin() + 2, {"l3", 100.0, 100.0});
        CHECK_THROWS_WITH_AS(hw::validate(d), doctest::Contains("l3"), std::invalid_argument);
    }
}

TEST_CASE("save/load round trip is field-identical") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "splitperf_hw_roundtrip.hw";
    for (const auto& name : hw::preset_names()) {
        hw::HardwareDescriptor original = hw::preset(name);
        hw::save_hardware(original, path);
        hw::HardwareDescriptor reloaded = hw::load_hardware(path);
        CHECK(reloaded.name == original.name);
        CHECK(reloaded.frequency_ghz == original.frequency_ghz);
        CHECK(reloaded.fma_latency_cycles == original.fma_latency_cycles);
        CHECK(reloaded.fma_throughput_cycles == original.fma_throughput_cycles);
        CHECK(reloaded.fpu_count == original.fpu_count);
        CHECK(reloaded.vector_bits == original.vector_bits);
        CHECK(reloaded.fp_register_count == original.fp_register_count);
        CHECK(reloaded.reservation_station_entries == original.reservation_station_entries);
        CHECK(reloaded.l1_capacity_bytes == original.l1_capacity_bytes);
        CHECK(reloaded.overlap_hypothesis == original.overlap_hypothesis);
        REQUIRE(reloaded.bandwidths.size() == original.bandwidths.size());
        for (size_t i = 0; i < original.bandwidths.size(); ++i) {
            CHECK(reloaded.bandwidths[i].level == original.bandwidths[i].level);
            CHECK(reloaded.bandwidths[i].read_gbs == original.bandwidths[i].read_gbs);
            CHECK(reloaded.bandwidths[i].write_gbs == original.bandwidths[i].write_gbs);
        }
    }
    fs::remove(path);
}

TEST_CASE("missing reservation station entries load as absent, never zero") {
    std::string text =
        "name = toy\n"
        "frequency_ghz = 1.0\n"
        "fma_latency_cycles = 4\n"
        "fma_throughput_cycles = 1\n"
        "fpu_count = 1\n"
        "vector_bits = 128\n"
        "l1_capacity_bytes = 1024\n"
        "overlap_hypothesis = A64FX_STYLE\n"
        "bw.l1.read = 10\nbw.l1.write = 10\n"
        "bw.l2.read = 5\nbw.l2.write = 5\n"
        "bw.mem.read = 1\nbw.mem.write = 1\n";
    hw::HardwareDescriptor d = hw::parse_hardware(text, "<string>");
    CHECK_FALSE(d.reservation_station_entries.has_value());
    CHECK_FALSE(d.fp_register_count.has_value());
}

TEST_CASE("parse errors carry the line and field") {
    CHECK_THROWS_WITH(hw::parse_hardware("name = x\nfrequency_ghz = fast\n", "cfg"),
                      doctest::Contains("cfg:2"));
    CHECK_THROWS_WITH(hw::parse_hardware("name = x\nwhat = 3\n", "cfg"),
                      doctest::Contains("unknown field 'what'"));
    CHECK_THROWS_WITH(hw::parse_hardware("no equals sign here\n", "cfg"),
                      doctest::Contains("cfg:1"));
    // half-specified bandwidth level
    std::string text =
        "name = toy\nfrequency_ghz = 1\nfma_latency_cycles = 4\nfma_throughput_cycles = 1\n"
        "fpu_count = 1\nvector_bits = 128\nl1_capacity_bytes = 1024\n"
        "overlap_hypothesis = A64FX_STYLE\n"
        "bw.l1.read = 10\nbw.l1.write = 10\nbw.l2.read = 5\nbw.l2.write = 5\n"
        "bw.mem.read = 1\n";
    CHECK_THROWS_WITH(hw::parse_hardware(text, "cfg"), doctest::Contains("bw.<level>"));
}

TEST_CASE("resolve takes preset names and paths, rejects the rest") {
    CHECK(hw::resolve("a64fx").name == "a64fx");
    CHECK_THROWS_AS(hw::resolve("not-a-machine"), std::invalid_argument);
}

TEST_CASE("bundled preset files match the built-in presets") {
    // The repo ships the same descriptors as editable files.
    namespace fs = std::filesystem;
    fs::path root = fs::path(__FILE__).parent_path().parent_path() / "presets";
    if (!fs::exists(root)) return;  // running from an install tree
    for (const auto& name : hw::preset_names()) {
        hw::HardwareDescriptor from_file = hw::load_hardware(root / (name + ".hw"));
        hw::HardwareDescriptor built_in = hw::preset(name);
        CHECK(from_file.name == built_in.name);
        CHECK(from_file.fma_latency_cycles == built_in.fma_latency_cycles);
        CHECK(from_file.fma_throughput_cycles == built_in.fma_throughput_cycles);
        CHECK(from_file.l1_capacity_bytes == built_in.l1_capacity_bytes);
        CHECK(from_file.bandwidths.size() == built_in.bandwidths.size());
    }
}
