#include "lope/lowering/layout.hpp"

#include <stdexcept>
#include <string>

namespace lope::lowering {

StorageLayout::StorageLayout(std::vector<std::int64_t> ext, std::vector<std::int64_t> lo, std::vector<std::int64_t> hi)
    : extent(std::move(ext)), halo_lo(std::move(lo)), halo_hi(std::move(hi))
{
    if (halo_lo.size() != extent.size() || halo_hi.size() != extent.size())
        throw std::invalid_argument("layout: halo rank differs from extent rank");
}

StorageLayout StorageLayout::from_halo(std::vector<std::int64_t> ext, const frontend::HaloSpec& halo)
{
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;
    for (const auto& h : halo.dims) {
        lo.push_back(h ? h->lo : 0);
        hi.push_back(h ? h->hi : 0);
    }
    return StorageLayout(std::move(ext), std::move(lo), std::move(hi));
}

std::int64_t StorageLayout::stride(int d) const
{
    std::int64_t s = 1;
    for (int k = 0; k < d; ++k)
        s *= padded(k);
    return s;
}

std::int64_t StorageLayout::cell_count() const
{
    std::int64_t n = 1;
    for (int d = 0; d < rank(); ++d)
        n *= padded(d);
    return n;
}

std::int64_t StorageLayout::linear(std::span<const std::int64_t> coords) const
{
    std::int64_t idx = 0;
    std::int64_t s = 1;
    for (int d = 0; d < rank(); ++d) {
        idx += coords[d] * s;
        s *= padded(d);
    }
    return idx;
}

std::vector<std::int64_t> StorageLayout::coords_of(std::int64_t linear_index) const
{
    std::vector<std::int64_t> c(extent.size());
    for (int d = 0; d < rank(); ++d) {
        c[d] = linear_index % padded(d);
        linear_index /= padded(d);
    }
    return c;
}

std::int64_t map_local_to_global(std::span<const std::int64_t> offsets, std::span<const std::int64_t> center,
                                 const StorageLayout& layout)
{
    const int rank = layout.rank();
    if (static_cast<int>(offsets.size()) != rank || static_cast<int>(center.size()) != rank)
        throw std::out_of_range("map_local_to_global: rank mismatch");
    std::int64_t idx = 0;
    std::int64_t s = 1;
    for (int d = 0; d < rank; ++d) {
        std::int64_t c = layout.storage_coord(d, center[d], offsets[d]);
        if (c < 0 || c >= layout.padded(d)) {
            throw std::out_of_range("map_local_to_global: dimension " + std::to_string(d + 1) + " coordinate " +
                                    std::to_string(c) + " outside storage");
        }
        idx += c * s;
        s *= layout.padded(d);
    }
    return idx;
}

} // namespace lope::lowering
