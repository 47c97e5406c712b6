#include "splitperf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "splitperf/csv.hpp"

namespace splitperf::pipeline {

using json = nlohmann::json;

std::vector<EnumerateRow> enumerate_listing(int polynomial_order, kernel::SplitEnumeration mode,
                                            const std::vector<hw::HardwareDescriptor>& machines,
                                            long long elements, int directions) {
    kernel::KernelSpec spec{polynomial_order, directions, elements, 8};
    kernel::validate(spec);

    std::vector<EnumerateRow> rows;
    for (const auto& cfg : kernel::enumerate_splits(spec.np(), mode)) {
        EnumerateRow row;
        row.split = cfg;
        row.ratio = depmodel::ratio_of_split(cfg, spec.np());
        for (const auto& machine : machines)
            row.gflops.push_back(depmodel::estimate(spec, cfg, machine).gflops_per_core);
        rows.push_back(std::move(row));
    }

    std::sort(rows.begin(), rows.end(), [](const EnumerateRow& a, const EnumerateRow& b) {
        if (a.ratio != b.ratio) return a.ratio < b.ratio;  // lower ratio = higher GFLOPS
        if (a.split.split_count() != b.split.split_count())
            return a.split.split_count() < b.split.split_count();
        return a.split.lengths < b.split.lengths;
    });
    return rows;
}

std::string enumerate_csv(const std::vector<EnumerateRow>& rows,
                          const std::vector<hw::HardwareDescriptor>& machines) {
    csv::Table table;
    table.header = {"rank", "split", "ratio"};
    for (const auto& machine : machines) table.header.push_back(machine.name + "_gflops");
    int rank = 1;
    for (const auto& row : rows) {
        std::vector<std::string> cells{std::to_string(rank++), kernel::format_split(row.split),
                                       csv::num(row.ratio)};
        for (double g : row.gflops) cells.push_back(csv::num(g));
        table.rows.push_back(std::move(cells));
    }
    return csv::format(table);
}

namespace {

baselines::EcmInputs ecm_inputs_from_json(const json& j, const std::string& origin) {
    baselines::EcmInputs inputs;
    try {
        inputs.t_c_ol = j.at("t_c_ol").get<double>();
        inputs.t_l1_ld = j.at("t_l1_ld").get<double>();
        inputs.t_l1_st = j.at("t_l1_st").get<double>();
        inputs.t_l2 = j.at("t_l2").get<double>();
        inputs.t_mem = j.at("t_mem").get<double>();
        inputs.work_flops = j.at("work_flops").get<double>();
        if (j.contains("t_l3_rd")) inputs.t_l3_rd = j["t_l3_rd"].get<double>();
        if (j.contains("t_l3_wr")) inputs.t_l3_wr = j["t_l3_wr"].get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error(origin + ": bad ECM inputs record: " + e.what());
    }
    return inputs;
}

}  // namespace

std::optional<baselines::EcmInputs> EcmInputsFile::lookup(const std::string& hw_name,
                                                          int p) const {
    auto it = by_hw_p.find({hw_name, p});
    if (it != by_hw_p.end()) return it->second;
    return single;
}

EcmInputsFile parse_ecm_inputs(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": not valid JSON: " + e.what());
    }

    EcmInputsFile file;
    if (j.is_object()) {
        file.single = ecm_inputs_from_json(j, origin);
        return file;
    }
    if (!j.is_array()) throw std::runtime_error(origin + ": expected a JSON object or array");
    for (const auto& rec : j) {
        if (!rec.contains("hw") || !rec.contains("P"))
            throw std::runtime_error(origin + ": array records need \"hw\" and \"P\" keys");
        std::string hw_name = rec["hw"].get<std::string>();
        int p = rec["P"].get<int>();
        file.by_hw_p[{hw_name, p}] = ecm_inputs_from_json(rec, origin);
    }
    return file;
}

EcmInputsFile load_ecm_inputs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ECM inputs file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ecm_inputs(buf.str(), path.string());
}

namespace {

double row_arithmetic_intensity(const dataset::SampleRow& row) {
    double np = static_cast<double>(row.polynomial_order + 1);
    double per_element_flops = static_cast<double>(row.flops) / static_cast<double>(row.elements);
    return per_element_flops / (np * np * np * 4.0 * 8.0);
}

std::optional<double> row_ecm_gflops(const dataset::SampleRow& row,
                                     const hw::HardwareDescriptor& machine,
                                     const EcmSource& ecm) {
    if (ecm.kind == EcmSourceKind::None) return std::nullopt;
    if (ecm.kind == EcmSourceKind::Derived) {
        baselines::EcmInputs inputs =
            baselines::derive_ecm_inputs(row.spec(), machine, ecm.active_cores);
        inputs.work_flops = static_cast<double>(row.flops);
        return baselines::ecm_gflops(inputs, machine);
    }
    auto inputs = ecm.file.lookup(row.hw_name, row.polynomial_order);
    if (!inputs) return std::nullopt;
    return baselines::ecm_gflops(*inputs, machine);
}

}  // namespace

CompareReport compare(const std::vector<dataset::SampleRow>& all_rows, const gbt::GbtModel& model,
                      const dataset::HwRegistry& registry, const dataset::FilterPolicy& policy,
                      const EcmSource& ecm, double roofline_active_cores) {
    if (!model.provenance)
        throw std::invalid_argument(
            "compare: model carries no train/test provenance; retrain with this toolkit");

    dataset::FilterOutcome filtered = dataset::filter_rows(all_rows, policy, registry);
    dataset::DatasetSplit split = dataset::split_train_test(
        filtered.kept, model.provenance->train_fraction, model.provenance->split_seed);

    std::set<std::pair<std::string, int>> trained_groups;
    for (const auto& row : split.train) trained_groups.insert({row.hw_name, row.polynomial_order});

    CompareReport report;
    auto add_row = [&](const dataset::SampleRow& row, bool in_test, bool excluded,
                       const std::string& reason) {
        const hw::HardwareDescriptor& machine = registry.at(row.hw_name);

        CompareRow out;
        out.hw_name = row.hw_name;
        out.polynomial_order = row.polynomial_order;
        out.split = row.split;
        out.elements = row.elements;
        out.directions = row.directions;
        out.measured_gflops = row.measured_gflops_per_core;
        out.in_test = in_test;
        out.excluded_from_training = excluded;
        out.exclusion_reason = reason;

        double ratio = gbt::predict_ratio(model, dataset::row_features(row, machine));
        out.la_gflops = depmodel::estimate_from_ratio(ratio, row.spec(), machine,
                                                      row.flops_override)
                            .gflops_per_core;

        const auto* mem = machine.find_level("mem");
        double bw = (mem->read_gbs + mem->write_gbs) / roofline_active_cores;
        out.roofline_gflops = baselines::roofline_gflops(row_arithmetic_intensity(row),
                                                         machine.peak_gflops_per_core(), bw);
        out.ecm_gflops = row_ecm_gflops(row, machine, ecm);
        report.rows.push_back(std::move(out));
    };

    for (const auto& row : split.test) add_row(row, true, false, "");
    for (const auto& ex : filtered.excluded)
        add_row(ex.row, false, true, dataset::to_string(ex.reason));

    std::sort(report.rows.begin(), report.rows.end(), [](const CompareRow& a, const CompareRow& b) {
        if (a.hw_name != b.hw_name) return a.hw_name < b.hw_name;
        if (a.polynomial_order != b.polynomial_order) return a.polynomial_order < b.polynomial_order;
        if (a.split.lengths != b.split.lengths) return a.split.lengths > b.split.lengths;
        return a.elements < b.elements;
    });

    // Per-(hw, P) MAPE over the report's own rows.
    for (size_t i = 0; i < report.rows.size();) {
        size_t j = i;
        std::vector<double> measured, la, roofline, ecm_pred, ecm_truth;
        while (j < report.rows.size() && report.rows[j].hw_name == report.rows[i].hw_name &&
               report.rows[j].polynomial_order == report.rows[i].polynomial_order) {
            const CompareRow& r = report.rows[j];
            measured.push_back(r.measured_gflops);
            la.push_back(r.la_gflops);
            roofline.push_back(r.roofline_gflops);
            if (r.ecm_gflops) {
                ecm_pred.push_back(*r.ecm_gflops);
                ecm_truth.push_back(r.measured_gflops);
            }
            ++j;
        }
        CompareGroup group;
        group.hw_name = report.rows[i].hw_name;
        group.polynomial_order = report.rows[i].polynomial_order;
        group.n_rows = static_cast<long long>(j - i);
        group.mape_la = gbt::mape(la, measured);
        group.mape_roofline = gbt::mape(roofline, measured);
        if (!ecm_pred.empty()) group.mape_ecm = gbt::mape(ecm_pred, ecm_truth);
        group.extrapolated =
            !trained_groups.count({group.hw_name, group.polynomial_order});
        report.groups.push_back(std::move(group));
        i = j;
    }
    return report;
}

std::string report_rows_csv(const CompareReport& report) {
    csv::Table table;
    table.header = {"hw",           "P",        "split",           "elements",
                    "directions",   "measured_gflops", "la_gflops", "roofline_gflops",
                    "ecm_gflops",   "in_test",  "excluded",        "exclusion_reason"};
    for (const auto& row : report.rows) {
        table.rows.push_back({row.hw_name, std::to_string(row.polynomial_order),
                              kernel::format_split(row.split), std::to_string(row.elements),
                              std::to_string(row.directions), csv::num(row.measured_gflops),
                              csv::num(row.la_gflops), csv::num(row.roofline_gflops),
                              row.ecm_gflops ? csv::num(*row.ecm_gflops) : std::string{},
                              row.in_test ? "1" : "0", row.excluded_from_training ? "1" : "0",
                              row.exclusion_reason});
    }
    return csv::format(table);
}

std::string report_summary_csv(const CompareReport& report) {
    csv::Table table;
    table.header = {"hw",       "P",           "n_rows",  "mape_la",
                    "mape_roofline", "mape_ecm", "extrapolated"};
    for (const auto& g : report.groups) {
        table.rows.push_back({g.hw_name, std::to_string(g.polynomial_order),
                              std::to_string(g.n_rows), csv::num(g.mape_la),
                              csv::num(g.mape_roofline),
                              g.mape_ecm ? csv::num(*g.mape_ecm) : std::string{},
                              g.extrapolated ? "1" : "0"});
    }
    return csv::format(table);
}

std::string report_human(const CompareReport& report) {
    std::ostringstream os;
    os << "MAPE of predicted GFLOPS per core vs measured, grouped by (hw, P)\n";
    os << "----------------------------------------------------------------\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-18s %4s %7s %12s %12s %12s %s\n", "hw", "P", "rows",
                  "learn-aug", "roofline", "ecm", "");
    os << buf;
    for (const auto& g : report.groups) {
        std::string ecm_text = g.mape_ecm ? csv::num(*g.mape_ecm, 4) + "%" : "n/a";
        std::snprintf(buf, sizeof buf, "%-18s %4d %7lld %11s%% %11s%% %12s %s\n",
                      g.hw_name.c_str(), g.polynomial_order, g.n_rows,
                      csv::num(g.mape_la, 4).c_str(), csv::num(g.mape_roofline, 4).c_str(),
                      ecm_text.c_str(), g.extrapolated ? "EXTRAPOLATED" : "");
        os << buf;
    }
    return os.str();
}

}  // namespace splitperf::pipeline
