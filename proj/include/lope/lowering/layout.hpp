#pragma once

#include "lope/frontend/ast.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lope::lowering {

/// Halo-padded, column-major storage of one block. Interior indices run
/// 1..extent per dimension; storage coordinates run 0..extent+lo+hi-1.
struct StorageLayout {
    std::vector<std::int64_t> extent;
    std::vector<std::int64_t> halo_lo;
    std::vector<std::int64_t> halo_hi;

    StorageLayout() = default;
    StorageLayout(std::vector<std::int64_t> extent, std::vector<std::int64_t> lo, std::vector<std::int64_t> hi);
    static StorageLayout from_halo(std::vector<std::int64_t> extent, const frontend::HaloSpec& halo);

    int rank() const { return static_cast<int>(extent.size()); }
    std::int64_t padded(int d) const { return extent[d] + halo_lo[d] + halo_hi[d]; }
    std::int64_t stride(int d) const;
    std::int64_t cell_count() const;

    /// Storage coordinate of interior index `center` shifted by `offset` in dim d.
    std::int64_t storage_coord(int d, std::int64_t center, std::int64_t offset) const
    {
        return center - 1 + halo_lo[d] + offset;
    }

    /// Column-major linear index of a storage coordinate tuple.
    std::int64_t linear(std::span<const std::int64_t> coords) const;

    /// Inverse of linear().
    std::vector<std::int64_t> coords_of(std::int64_t linear_index) const;

    bool operator==(const StorageLayout&) const = default;
};

/// Linear storage index of the element at `offsets` from interior point
/// `center`. Throws std::out_of_range if the element lies outside storage.
std::int64_t map_local_to_global(std::span<const std::int64_t> offsets, std::span<const std::int64_t> center,
                                 const StorageLayout& layout);

} // namespace lope::lowering
