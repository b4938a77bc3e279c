#include "lope/runtime/distributed.hpp"

#include "lope/runtime/error.hpp"

#include <algorithm>
#include <random>

namespace lope::runtime {

namespace {

std::size_t cell(const StorageLayout& l, const std::vector<std::int64_t>& c)
{
    return static_cast<std::size_t>(l.linear(c));
}

// Storage coordinate tuples with dim d restricted to [a, b); other dims span
// their full padded range.
void for_each_in_slab(const StorageLayout& l, int d, std::int64_t a, std::int64_t b,
                      const std::function<void(const std::vector<std::int64_t>&)>& f)
{
    if (a >= b)
        return;
    std::vector<std::int64_t> c(static_cast<std::size_t>(l.rank()), 0);
    c[static_cast<std::size_t>(d)] = a;
    while (true) {
        f(c);
        int k = 0;
        for (; k < l.rank(); ++k) {
            auto& v = c[static_cast<std::size_t>(k)];
            std::int64_t lo = k == d ? a : 0;
            std::int64_t hi = k == d ? b : l.padded(k);
            if (++v < hi)
                break;
            v = lo;
        }
        if (k == l.rank())
            return;
    }
}

bool interior(const StorageLayout& l, const std::vector<std::int64_t>& c)
{
    for (int d = 0; d < l.rank(); ++d) {
        auto v = c[static_cast<std::size_t>(d)];
        if (v < l.halo_lo[static_cast<std::size_t>(d)] || v >= l.halo_lo[static_cast<std::size_t>(d)] + l.extent[static_cast<std::size_t>(d)])
            return false;
    }
    return true;
}

class BufferAccess : public lowering::PointAccess {
  public:
    BufferAccess(const std::vector<LaunchBuffer>& buffers, const std::vector<std::vector<double>>& snapshot,
                 const std::vector<std::int64_t>& center)
        : buffers_(buffers), snapshot_(snapshot), center_(center)
    {
    }
    double read(const lowering::OffsetRead& r) override
    {
        auto slot = static_cast<std::size_t>(r.array_slot);
        auto idx = static_cast<std::size_t>(lowering::map_local_to_global(r.offsets, center_, *buffers_[slot].layout));
        return r.from_output ? (*buffers_[slot].data)[idx] : snapshot_[slot][idx];
    }
    void write(int slot, double v) override
    {
        auto s = static_cast<std::size_t>(slot);
        std::vector<std::int64_t> zero(center_.size(), 0);
        (*buffers_[s].data)[static_cast<std::size_t>(lowering::map_local_to_global(zero, center_, *buffers_[s].layout))] = v;
    }

  private:
    const std::vector<LaunchBuffer>& buffers_;
    const std::vector<std::vector<double>>& snapshot_;
    const std::vector<std::int64_t>& center_;
};

} // namespace

void for_each_cell(const StorageLayout& layout, const std::function<void(const std::vector<std::int64_t>&)>& f)
{
    if (layout.rank() == 0 || layout.cell_count() == 0)
        return;
    for_each_in_slab(layout, 0, 0, layout.padded(0), f);
}

std::int64_t DistributedArray::global_extent(int d) const
{
    auto e = layout.extent[static_cast<std::size_t>(d)];
    return static_cast<std::size_t>(d) < shape.size() ? e * shape[static_cast<std::size_t>(d)] : e;
}

DistributedArray alloc_coarray(const ProcessGrid& grid, const std::string& name, int corank,
                               const StorageLayout& layout)
{
    return alloc_coarray(grid.images, coarray_shape(grid, corank), name, corank, layout);
}

DistributedArray alloc_coarray(int images, std::vector<std::int64_t> shape, const std::string& name, int corank,
                               const StorageLayout& layout)
{
    for (int d = 0; d < layout.rank(); ++d) {
        auto e = layout.extent[static_cast<std::size_t>(d)];
        auto widest = std::max(layout.halo_lo[static_cast<std::size_t>(d)], layout.halo_hi[static_cast<std::size_t>(d)]);
        if (e < 1 || e < widest) {
            throw RuntimeError(ErrorCode::AllocShapeMismatch, "array '" + name + "' dimension " +
                                                                  std::to_string(d + 1) + ": interior extent " +
                                                                  std::to_string(e) + " is smaller than its halo " +
                                                                  std::to_string(std::max<std::int64_t>(widest, 1)));
        }
    }
    DistributedArray a;
    a.name = name;
    a.rank = layout.rank();
    a.corank = corank;
    a.shape = std::move(shape);
    a.layout = layout;
    a.blocks.resize(static_cast<std::size_t>(images));
    for (auto& b : a.blocks) {
        b.allocated = true;
        b.host.assign(static_cast<std::size_t>(layout.cell_count()), 0.0);
    }
    return a;
}

void scatter_global(DistributedArray& a, const GlobalArray& global)
{
    if (a.rank > 2)
        throw RuntimeError(std::nullopt, "array '" + a.name + "': only rank 1 and 2 arrays can be scattered");
    std::int64_t gm = a.global_extent(0);
    std::int64_t gn = a.rank > 1 ? a.global_extent(1) : 1;
    if (global.m != gm || global.n != gn) {
        throw RuntimeError(ErrorCode::AllocShapeMismatch,
                           "array '" + a.name + "' spans " + std::to_string(gm) + " x " + std::to_string(gn) +
                               " globally but the input is " + std::to_string(global.m) + " x " +
                               std::to_string(global.n));
    }
    for (int image = 1; image <= static_cast<int>(a.blocks.size()); ++image) {
        auto coords = image_coords(a.shape, image);
        Block& b = a.block(image);
        for_each_cell(a.layout, [&](const std::vector<std::int64_t>& c) {
            std::int64_t g[2] = {1, 1};
            for (int d = 0; d < a.rank; ++d) {
                auto sd = static_cast<std::size_t>(d);
                std::int64_t origin = sd < coords.size() ? (coords[sd] - 1) * a.layout.extent[sd] : 0;
                g[d] = wrap1(origin + c[sd] - a.layout.halo_lo[sd] + 1, d == 0 ? gm : gn);
            }
            b.host[cell(a.layout, c)] = global.at(g[0], g[1]);
        });
    }
}

GlobalArray gather_global(const DistributedArray& a)
{
    if (a.rank > 2)
        throw RuntimeError(std::nullopt, "array '" + a.name + "': only rank 1 and 2 arrays can be gathered");
    GlobalArray g(a.global_extent(0), a.rank > 1 ? a.global_extent(1) : 1);
    for (int image = 1; image <= static_cast<int>(a.blocks.size()); ++image) {
        const Block& b = a.block(image);
        if (!b.allocated)
            throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + a.name + "' is not allocated on image " +
                                                              std::to_string(image));
        auto coords = image_coords(a.shape, image);
        for_each_cell(a.layout, [&](const std::vector<std::int64_t>& c) {
            if (!interior(a.layout, c))
                return;
            std::int64_t p[2] = {1, 1};
            for (int d = 0; d < a.rank; ++d) {
                auto sd = static_cast<std::size_t>(d);
                std::int64_t origin = sd < coords.size() ? (coords[sd] - 1) * a.layout.extent[sd] : 0;
                p[d] = origin + c[sd] - a.layout.halo_lo[sd] + 1;
            }
            g.at(p[0], p[1]) = b.host[cell(a.layout, c)];
        });
    }
    return g;
}

void halo_transfer(DistributedArray& a, TransferCounters& counters)
{
    const StorageLayout& l = a.layout;
    if (a.corank != a.rank) {
        throw RuntimeError(ErrorCode::MissingHalo, "array '" + a.name + "' has corank " + std::to_string(a.corank) +
                                                       " but rank " + std::to_string(a.rank));
    }
    for (int image = 1; image <= static_cast<int>(a.blocks.size()); ++image) {
        if (!a.block(image).allocated)
            throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + a.name + "' is not allocated on image " +
                                                              std::to_string(image));
    }

    // Device level: the border interior slabs every neighbour will read.
    for (auto& b : a.blocks) {
        if (!b.mirror)
            continue;
        for_each_cell(l, [&](const std::vector<std::int64_t>& c) {
            if (!interior(l, c))
                return;
            bool border = false;
            for (int d = 0; d < l.rank(); ++d) {
                auto sd = static_cast<std::size_t>(d);
                std::int64_t rel = c[sd] - l.halo_lo[sd];
                border = border || rel < l.halo_hi[sd] || rel >= l.extent[sd] - l.halo_lo[sd];
            }
            if (border) {
                b.host[cell(l, c)] = b.mirror->data[cell(l, c)];
                ++counters.device_to_host_cells;
            }
        });
    }

    // Image level: dimension-ordered sweeps; later sweeps carry the halo
    // cells written by earlier ones, which fills the corners.
    for (int d = 0; d < l.rank(); ++d) {
        auto sd = static_cast<std::size_t>(d);
        std::int64_t m = l.extent[sd];
        std::int64_t lo = l.halo_lo[sd];
        std::int64_t hi = l.halo_hi[sd];
        for (int image = 1; image <= static_cast<int>(a.blocks.size()); ++image) {
            auto coords = image_coords(a.shape, image);
            auto low = coords;
            auto high = coords;
            low[sd] -= 1;
            high[sd] += 1;
            const Block& from_low = a.block(image_of(a.shape, low));
            const Block& from_high = a.block(image_of(a.shape, high));
            Block& me = a.block(image);
            for_each_in_slab(l, d, 0, lo, [&](const std::vector<std::int64_t>& c) {
                auto src = c;
                src[sd] += m;
                me.host[cell(l, c)] = from_low.host[cell(l, src)];
                ++counters.exchanged_cells;
            });
            for_each_in_slab(l, d, lo + m, lo + m + hi, [&](const std::vector<std::int64_t>& c) {
                auto src = c;
                src[sd] -= m;
                me.host[cell(l, c)] = from_high.host[cell(l, src)];
                ++counters.exchanged_cells;
            });
        }
    }

    ++a.halo_epoch;
    ++counters.transfers;
    for (auto& b : a.blocks) {
        b.halo_epoch = a.halo_epoch;
        if (!b.mirror)
            continue;
        for_each_cell(l, [&](const std::vector<std::int64_t>& c) {
            if (interior(l, c))
                return;
            b.mirror->data[cell(l, c)] = b.host[cell(l, c)];
            ++counters.host_to_device_cells;
        });
        b.mirror->halo_epoch = a.halo_epoch;
    }
}

std::uint64_t launch_concurrent(const lowering::KernelIR& ir, const std::vector<LaunchBuffer>& buffers,
                                const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                                const std::vector<lowering::Value>& scalar_args, const LaunchOrder& order)
{
    std::vector<std::vector<std::int64_t>> points;
    if (!lo.empty()) {
        std::vector<std::int64_t> p = lo;
        bool empty = false;
        for (std::size_t d = 0; d < lo.size(); ++d)
            empty = empty || lo[d] > hi[d];
        while (!empty) {
            points.push_back(p);
            std::size_t d = 0;
            for (; d < p.size(); ++d) {
                if (++p[d] <= hi[d])
                    break;
                p[d] = lo[d];
            }
            if (d == p.size())
                break;
        }
    }
    if (order.order == Order::Reverse) {
        std::reverse(points.begin(), points.end());
    } else if (order.order == Order::Shuffle) {
        std::mt19937_64 rng(order.seed);
        std::shuffle(points.begin(), points.end(), rng);
    }

    std::vector<std::vector<double>> snapshot;
    snapshot.reserve(buffers.size());
    for (const auto& b : buffers)
        snapshot.push_back(*b.data);
    for (const auto& p : points) {
        BufferAccess access(buffers, snapshot, p);
        lowering::run_point(ir, scalar_args, access);
    }
    return points.size();
}

} // namespace lope::runtime
