#include "splitperf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace splitperf::kernel {

void validate(const KernelSpec& spec) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("kernel spec: invariant violated: " + what);
    };
    // polynomial_order 0 (np = 1) is admitted as the degenerate single-term case.
    if (spec.polynomial_order < 0) fail("polynomial_order >= 0");
    if (spec.directions < 1 || spec.directions > 3) fail("directions in {1, 2, 3}");
    if (spec.elements < 1) fail("elements >= 1");
    if (spec.precision_bytes < 1) fail("precision_bytes >= 1");
}

int SplitConfig::sum() const { return std::accumulate(lengths.begin(), lengths.end(), 0); }

int SplitConfig::max_length() const {
    return lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
}

int SplitConfig::min_length() const {
    return lengths.empty() ? 0 : *std::min_element(lengths.begin(), lengths.end());
}

SplitConfig parse_split(const std::string& text) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("split config '" + text + "': " + what +
                                    " (expected N:l1+l2+...+ln)");
    };
    size_t colon = text.find(':');
    if (colon == std::string::npos) fail("missing ':'");
    int declared = 0;
    try {
        size_t pos = 0;
        declared = std::stoi(text.substr(0, colon), &pos);
        if (pos != colon) fail("split count is not an integer");
    } catch (const std::invalid_argument&) {
        fail("split count is not an integer");
    }

    SplitConfig cfg;
    std::string rest = text.substr(colon + 1);
    std::istringstream parts(rest);
    std::string part;
    while (std::getline(parts, part, '+')) {
        if (part.empty()) fail("empty split length");
        try {
            size_t pos = 0;
            int len = std::stoi(part, &pos);
            if (pos != part.size()) fail("split length '" + part + "' is not an integer");
            cfg.lengths.push_back(len);
        } catch (const std::invalid_argument&) {
            fail("split length '" + part + "' is not an integer");
        }
    }
    if (rest.empty() || rest.back() == '+') fail("trailing '+'");
    if (cfg.lengths.empty()) fail("no split lengths");
    if (declared != cfg.split_count())
        fail("declared count " + std::to_string(declared) + " != " +
             std::to_string(cfg.split_count()) + " lengths");
    for (int len : cfg.lengths)
        if (len < 1) fail("split lengths must be >= 1");
    return cfg;
}

std::string format_split(const SplitConfig& cfg) {
    std::ostringstream os;
    os << cfg.split_count() << ":";
    for (size_t i = 0; i < cfg.lengths.size(); ++i) {
        if (i) os << "+";
        os << cfg.lengths[i];
    }
    return os.str();
}

void validate_split(const SplitConfig& cfg, int np) {
    if (cfg.lengths.empty())
        throw std::invalid_argument("split config: at least one split length required");
    for (int len : cfg.lengths)
        if (len < 1) throw std::invalid_argument("split config: every length must be >= 1");
    if (cfg.sum() != np)
        throw std::invalid_argument("split config " + format_split(cfg) + " sums to " +
                                    std::to_string(cfg.sum()) + ", expected np = " +
                                    std::to_string(np));
}

namespace {

// Partitions of n in descending lexicographic order: first part from bound
// down to 1, remainder recursively with parts no larger than the first.
void partitions_rec(int remaining, int bound, std::vector<int>& prefix,
                    std::vector<SplitConfig>& out) {
    if (remaining == 0) {
        out.push_back({prefix});
        return;
    }
    for (int part = std::min(remaining, bound); part >= 1; --part) {
        prefix.push_back(part);
        partitions_rec(remaining - part, part, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<SplitConfig> enumerate_splits(int np, SplitEnumeration mode) {
    if (np < 1) throw std::invalid_argument("enumerate_splits: np must be >= 1");

    std::vector<SplitConfig> partitions;
    std::vector<int> prefix;
    partitions_rec(np, np, prefix, partitions);

    if (mode == SplitEnumeration::Partitions) return partitions;

    // Compositions, grouped under their partition: each partition's distinct
    // arrangements in descending lexicographic order.
    std::vector<SplitConfig> out;
    for (const auto& p : partitions) {
        std::vector<int> arrangement = p.lengths;  // already sorted descending
        do {
            out.push_back({arrangement});
        } while (std::prev_permutation(arrangement.begin(), arrangement.end()));
    }
    return out;
}

long long flops(const KernelSpec& spec) {
    validate(spec);
    long long np = spec.np();
    return spec.elements * spec.directions * np * np * np * np * 2;
}

long long fma_count(const KernelSpec& spec, const hw::HardwareDescriptor& desc) {
    long long mul_adds = flops(spec) / 2;
    long long lanes = desc.lanes_f64();
    return (mul_adds + lanes - 1) / lanes;
}

Footprint data_footprint_bytes(const KernelSpec& spec) {
    validate(spec);
    std::uint64_t np = static_cast<std::uint64_t>(spec.np());
    std::uint64_t point_bytes = np * np * np * spec.precision_bytes;
    Footprint fp;
    fp.working_set_bytes = 2 * point_bytes;
    fp.working_set_with_matrices_bytes = fp.working_set_bytes + 3 * np * np * spec.precision_bytes;
    fp.traffic_bytes = 4 * point_bytes;
    return fp;
}

namespace {

std::string term(int term_index, Dialect dialect) {
    std::ostringstream os;
    if (dialect == Dialect::FortranLike)
        os << "mat(i," << term_index << ") * q(" << term_index << ",j,k)";
    else
        os << "mat[i][" << (term_index - 1) << "] * q[" << (term_index - 1) << "][j][k]";
    return os.str();
}

}  // namespace

std::string emit_kernel_source(const KernelSpec& spec, const SplitConfig& cfg, Dialect dialect) {
    validate(spec);
    validate_split(cfg, spec.np());

    const bool fortran = (dialect == Dialect::FortranLike);
    const std::string target = fortran ? "q_tmp(i,j,k)" : "q_tmp[i][j][k]";
    const std::string cont = fortran ? " +&" : " +";
    std::ostringstream os;

    if (fortran) {
        os << "do k=1, Np\n"
           << "do j=1, Np\n"
           << "do i=1, Np\n";
    } else {
        os << "for (int k = 0; k < Np; ++k) {\n"
           << "for (int j = 0; j < Np; ++j) {\n"
           << "for (int i = 0; i < Np; ++i) {\n";
    }

    const int n = cfg.split_count();
    int next_term = 1;
    for (int s = 0; s < n; ++s) {
        std::string lhs =
            (n == 1) ? target : std::string(fortran ? "tmp" : "double tmp") + std::to_string(s + 1);
        std::string indent(lhs.size() + 7, ' ');
        os << "    " << lhs << " = ";
        for (int t = 0; t < cfg.lengths[s]; ++t) {
            if (t) os << cont << "\n" << indent;
            os << term(next_term++, dialect);
        }
        os << (fortran ? "\n" : ";\n");
    }
    if (n > 1) {
        os << "    " << target << " = ";
        for (int s = 1; s <= n; ++s) {
            if (s > 1) os << " + ";
            os << "tmp" << s;
        }
        os << (fortran ? "\n" : ";\n");
    }

    if (fortran)
        os << "end do\nend do\nend do\n";
    else
        os << "}\n}\n}\n";
    return os.str();
}

}  // namespace splitperf::kernel
