#pragma once

#include "lope/lowering/kernel_ir.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lope::runtime {

/// Dense global interior, column-major, 1-based. 1-D arrays have n = 1.
struct GlobalArray {
    std::int64_t m = 0;
    std::int64_t n = 1;
    std::vector<double> data;

    GlobalArray() = default;
    GlobalArray(std::int64_t m_, std::int64_t n_, double fill = 0.0)
        : m(m_), n(n_), data(static_cast<std::size_t>(m_ * n_), fill)
    {
    }
    double& at(std::int64_t i, std::int64_t j = 1) { return data[static_cast<std::size_t>((j - 1) * m + (i - 1))]; }
    double at(std::int64_t i, std::int64_t j = 1) const
    {
        return data[static_cast<std::size_t>((j - 1) * m + (i - 1))];
    }
    bool operator==(const GlobalArray&) const = default;
};

/// `M N` header, then N lines of M values. Throws std::runtime_error on
/// malformed text.
GlobalArray parse_array_text(const std::string& text);

/// Inverse of parse_array_text; values printed with 17 significant digits.
std::string format_array_text(const GlobalArray& a);

/// One application of the kernel to every global point with periodic
/// neighbours, reading `in` and writing a fresh array. `in` is parallel to
/// ir.array_params; `rank` is 1 or 2.
std::vector<GlobalArray> oracle_step(const std::vector<GlobalArray>& in, const lowering::KernelIR& ir, int rank,
                                     const std::vector<lowering::Value>& scalar_args = {});

} // namespace lope::runtime
