#include "splitperf/hardware.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace splitperf::hw {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void parse_fail(std::string_view origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw std::runtime_error(os.str());
}

double parse_number(std::string_view origin, int line, const std::string& key,
                    const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        parse_fail(origin, line, "field '" + key + "': cannot parse number '" + value + "'");
    }
}

int parse_int(std::string_view origin, int line, const std::string& key,
              const std::string& value) {
    double v = parse_number(origin, line, key, value);
    if (v != std::floor(v))
        parse_fail(origin, line, "field '" + key + "': expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

constexpr const char* kLevelOrder[] = {"l1", "l2", "l3", "mem"};

int level_rank(const std::string& level) {
    for (int i = 0; i < 4; ++i)
        if (level == kLevelOrder[i]) return i;
    return -1;
}

}  // namespace

const BandwidthLevel* HardwareDescriptor::find_level(std::string_view level) const {
    for (const auto& bw : bandwidths)
        if (bw.level == level) return &bw;
    return nullptr;
}

const char* to_string(OverlapHypothesis hyp) {
    return hyp == OverlapHypothesis::A64FXStyle ? "A64FX_STYLE" : "CASCADE_LAKE_STYLE";
}

OverlapHypothesis overlap_hypothesis_from_string(std::string_view text) {
    if (text == "A64FX_STYLE") return OverlapHypothesis::A64FXStyle;
    if (text == "CASCADE_LAKE_STYLE") return OverlapHypothesis::CascadeLakeStyle;
    throw std::invalid_argument("unknown overlap_hypothesis '" + std::string(text) +
                                "' (expected A64FX_STYLE or CASCADE_LAKE_STYLE)");
}

void validate(const HardwareDescriptor& desc) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("hardware descriptor '" + desc.name +
                                    "': invariant violated: " + what);
    };
    if (desc.name.empty()) fail("name must be non-empty");
    if (!(desc.frequency_ghz > 0)) fail("frequency_ghz > 0");
    if (!(desc.fma_throughput_cycles > 0)) fail("fma_throughput_cycles > 0");
    if (!(desc.fma_latency_cycles >= desc.fma_throughput_cycles))
        fail("fma_latency_cycles >= fma_throughput_cycles");
    if (desc.fpu_count < 1) fail("fpu_count >= 1");
    // 64 admits scalar accounting in the FMA instruction count.
    if (desc.vector_bits != 64 && desc.vector_bits != 128 && desc.vector_bits != 256 &&
        desc.vector_bits != 512)
        fail("vector_bits in {64, 128, 256, 512}");
    if (desc.fp_register_count && *desc.fp_register_count < 1)
        fail("fp_register_count >= 1 when present");
    if (desc.reservation_station_entries && *desc.reservation_station_entries < 1)
        fail("reservation_station_entries >= 1 when present");
    if (desc.l1_capacity_bytes == 0) fail("l1_capacity_bytes > 0");

    bool has_l3 = false;
    int prev_rank = -1;
    for (const auto& bw : desc.bandwidths) {
        int rank = level_rank(bw.level);
        if (rank < 0) fail("unknown bandwidth level '" + bw.level + "'");
        if (rank <= prev_rank) fail("bandwidth levels must appear once, ordered l1..mem");
        prev_rank = rank;
        if (!(bw.read_gbs > 0) || !(bw.write_gbs > 0))
            fail("bandwidths > 0 (level '" + bw.level + "')");
        if (bw.level == "l3") has_l3 = true;
    }
    if (!desc.find_level("l1") || !desc.find_level("l2") || !desc.find_level("mem"))
        fail("bandwidth levels l1, l2 and mem are required");
    if (has_l3 != (desc.overlap_hypothesis == OverlapHypothesis::CascadeLakeStyle))
        fail("l3 bandwidths present iff overlap_hypothesis is CASCADE_LAKE_STYLE");
}

HardwareDescriptor parse_hardware(std::string_view text, std::string_view origin) {
    HardwareDescriptor desc;
    // level -> (read, write); presence flags track which half was set.
    std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> bw;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(origin, line_no, "expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) parse_fail(origin, line_no, "empty key");
        if (value.empty()) parse_fail(origin, line_no, "field '" + key + "': empty value");

        if (key == "name") {
            desc.name = value;
        } else if (key == "frequency_ghz") {
            desc.frequency_ghz = parse_number(origin, line_no, key, value);
        } else if (key == "fma_latency_cycles") {
            desc.fma_latency_cycles = parse_number(origin, line_no, key, value);
        } else if (key == "fma_throughput_cycles") {
            desc.fma_throughput_cycles = parse_number(origin, line_no, key, value);
        } else if (key == "fpu_count") {
            desc.fpu_count = parse_int(origin, line_no, key, value);
        } else if (key == "vector_bits") {
            desc.vector_bits = parse_int(origin, line_no, key, value);
        } else if (key == "fp_register_count") {
            desc.fp_register_count = parse_int(origin, line_no, key, value);
        } else if (key == "reservation_station_entries") {
            desc.reservation_station_entries = parse_int(origin, line_no, key, value);
        } else if (key == "l1_capacity_bytes") {
            double v = parse_number(origin, line_no, key, value);
            desc.l1_capacity_bytes = static_cast<std::uint64_t>(v);
        } else if (key == "overlap_hypothesis") {
            try {
                desc.overlap_hypothesis = overlap_hypothesis_from_string(value);
            } catch (const std::exception& e) {
                parse_fail(origin, line_no, e.what());
            }
        } else if (key.rfind("bw.", 0) == 0) {
            size_t dot = key.find('.', 3);
            if (dot == std::string::npos)
                parse_fail(origin, line_no, "bandwidth key must be bw.<level>.read|write");
            std::string level = key.substr(3, dot - 3);
            std::string dir = key.substr(dot + 1);
            if (level_rank(level) < 0)
                parse_fail(origin, line_no, "unknown bandwidth level '" + level + "'");
            double v = parse_number(origin, line_no, key, value);
            if (dir == "read")
                bw[level].first = v;
            else if (dir == "write")
                bw[level].second = v;
            else
                parse_fail(origin, line_no, "bandwidth direction must be read or write");
        } else {
            parse_fail(origin, line_no, "unknown field '" + key + "'");
        }
    }

    for (const char* level : kLevelOrder) {
        auto it = bw.find(level);
        if (it == bw.end()) continue;
        if (!it->second.first || !it->second.second)
            throw std::runtime_error(std::string(origin) + ": level '" + level +
                                     "' needs both bw.<level>.read and bw.<level>.write");
        desc.bandwidths.push_back({level, *it->second.first, *it->second.second});
    }

    validate(desc);
    return desc;
}

HardwareDescriptor load_hardware(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open hardware descriptor: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_hardware(buf.str(), path.string());
}

std::string format_hardware(const HardwareDescriptor& desc) {
    std::ostringstream os;
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        std::string t = s.str();
        return t;
    };
    os << "name = " << desc.name << "\n";
    os << "frequency_ghz = " << num(desc.frequency_ghz) << "\n";
    os << "fma_latency_cycles = " << num(desc.fma_latency_cycles) << "\n";
    os << "fma_throughput_cycles = " << num(desc.fma_throughput_cycles) << "\n";
    os << "fpu_count = " << desc.fpu_count << "\n";
    os << "vector_bits = " << desc.vector_bits << "\n";
    if (desc.fp_register_count) os << "fp_register_count = " << *desc.fp_register_count << "\n";
    if (desc.reservation_station_entries)
        os << "reservation_station_entries = " << *desc.reservation_station_entries << "\n";
    os << "l1_capacity_bytes = " << desc.l1_capacity_bytes << "\n";
    os << "overlap_hypothesis = " << to_string(desc.overlap_hypothesis) << "\n";
    for (const auto& bw : desc.bandwidths) {
        os << "bw." << bw.level << ".read = " << num(bw.read_gbs) << "\n";
        os << "bw." << bw.level << ".write = " << num(bw.write_gbs) << "\n";
    }
    return os.str();
}

void save_hardware(const HardwareDescriptor& desc, const std::filesystem::path& path) {
    validate(desc);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write hardware descriptor: " + path.string());
    out << format_hardware(desc);
}

namespace {

// Table-derived presets. FMA latency/throughput and the core counts come
// from vendor documentation; L2/L3/memory bandwidths are nominal published
// figures and are meant to be replaced with measured values (see README).
HardwareDescriptor make_a64fx() {
    HardwareDescriptor d;
    d.name = "a64fx";
    d.frequency_ghz = 2.2;       // boost mode
    d.fma_latency_cycles = 9.0;
    d.fma_throughput_cycles = 0.5;
    d.fpu_count = 2;
    d.vector_bits = 512;         // SVE
    d.fp_register_count = 128;
    d.reservation_station_entries = 40;
    d.l1_capacity_bytes = 64 * 1024;
    d.overlap_hypothesis = OverlapHypothesis::A64FXStyle;
    d.bandwidths = {
        {"l1", 13516.8, 6758.4},  // 48 cores x 128 B/cy load, 64 B/cy store
        {"l2", 3686.4, 1843.2},   // 4 CMGs x L2 aggregate
        {"mem", 1024.0, 1024.0},  // HBM2
    };
    return d;
}

HardwareDescriptor make_xeon_gold_6230() {
    HardwareDescriptor d;
    d.name = "xeon-gold-6230";
    d.frequency_ghz = 2.0;       // all-core AVX-512 frequency
    d.fma_latency_cycles = 4.0;
    d.fma_throughput_cycles = 0.5;
    d.fpu_count = 2;
    d.vector_bits = 512;         // AVX-512
    d.fp_register_count = 168;
    d.reservation_station_entries = 97;
    d.l1_capacity_bytes = 32 * 1024;
    d.overlap_hypothesis = OverlapHypothesis::CascadeLakeStyle;
    d.bandwidths = {
        {"l1", 5120.0, 2560.0},   // 20 cores x 128 B/cy load, 64 B/cy store
        {"l2", 2560.0, 1280.0},
        {"l3", 800.0, 800.0},
        {"mem", 140.8, 140.8},    // 6-channel DDR4-2933
    };
    return d;
}

}  // namespace

HardwareDescriptor preset(std::string_view name) {
    if (name == "a64fx") return make_a64fx();
    if (name == "xeon-gold-6230") return make_xeon_gold_6230();
    throw std::invalid_argument("unknown hardware preset '" + std::string(name) +
                                "' (available: a64fx, xeon-gold-6230)");
}

std::vector<std::string> preset_names() { return {"a64fx", "xeon-gold-6230"}; }

bool is_preset(std::string_view name) {
    return name == "a64fx" || name == "xeon-gold-6230";
}

HardwareDescriptor resolve(const std::string& name_or_path) {
    if (is_preset(name_or_path)) return preset(name_or_path);
    if (std::filesystem::exists(name_or_path)) return load_hardware(name_or_path);
    throw std::invalid_argument("'" + name_or_path +
                                "' is neither a hardware preset nor an existing file");
}

}  // namespace splitperf::hw
