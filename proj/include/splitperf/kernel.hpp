#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitperf/hardware.hpp"

namespace splitperf::kernel {

// One tensor n-mode product workload: a triple loop nest over Np^3 points,
// each evaluating an Np-term inner product, applied once per direction and
// per element.
struct KernelSpec {
    int polynomial_order = 1;   // P; np() = P + 1 terms in the inner product
    int directions = 3;
    long long elements = 1;
    int precision_bytes = 8;

    int np() const { return polynomial_order + 1; }
};

void validate(const KernelSpec& spec);

// How the inner product is divided into independent partial sums.
struct SplitConfig {
    std::vector<int> lengths;   // l1..lN, in order

    int split_count() const { return static_cast<int>(lengths.size()); }
    int sum() const;
    int max_length() const;
    int min_length() const;
};

// Textual form `N:l1+l2+...+ln`, e.g. "3:3+3+2".
SplitConfig parse_split(const std::string& text);
std::string format_split(const SplitConfig& cfg);

// Throws std::invalid_argument unless lengths are positive and sum to np.
void validate_split(const SplitConfig& cfg, int np);

enum class SplitEnumeration { Compositions, Partitions };

// All ways to divide an np-term inner product. Compositions are ordered
// (2^(np-1) of them); partitions deduplicate by sorted lengths. Output order
// is partition-major: partitions in descending lexicographic order, each
// followed by its distinct arrangements in descending lexicographic order.
std::vector<SplitConfig> enumerate_splits(int np, SplitEnumeration mode);

// Total floating-point operations: elements x directions x Np^3 points,
// each point an Np-term inner product at one multiply + one add per term.
long long flops(const KernelSpec& spec);

// Vectorized FMA instructions retired: flops/2 packed into vector_bits/64
// lanes, rounded up. A 64-bit descriptor gives scalar accounting.
long long fma_count(const KernelSpec& spec, const hw::HardwareDescriptor& desc);

// Per-element byte figures. Working set counts the two state arrays held
// live; the with-matrices variant adds the three Np^2 operator matrices.
// Traffic counts the four array passes (read+write of both state arrays)
// used by the arithmetic-intensity denominator.
struct Footprint {
    std::uint64_t working_set_bytes = 0;
    std::uint64_t working_set_with_matrices_bytes = 0;
    std::uint64_t traffic_bytes = 0;
};

Footprint data_footprint_bytes(const KernelSpec& spec);

enum class Dialect { FortranLike, CLike };

// Emit the triple loop nest with the loop body split per `cfg`: one partial
// inner product per split plus a final accumulation statement (no split:
// one direct assignment).
std::string emit_kernel_source(const KernelSpec& spec, const SplitConfig& cfg, Dialect dialect);

}  // namespace splitperf::kernel
