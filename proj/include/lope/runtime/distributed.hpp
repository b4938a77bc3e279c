#pragma once

#include "lope/lowering/kernel_ir.hpp"
#include "lope/lowering/layout.hpp"
#include "lope/runtime/global_array.hpp"
#include "lope/runtime/grid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lope::runtime {

using lowering::StorageLayout;

/// Device copy of one block; same layout as the host block.
struct DeviceBuffer {
    std::int64_t device = 0;
    bool resident = true;
    std::vector<double> data;
    std::uint64_t halo_epoch = 0;
};

struct Block {
    bool allocated = false;
    std::vector<double> host;
    std::uint64_t halo_epoch = 0;
    std::optional<DeviceBuffer> mirror;
};

struct TransferCounters {
    std::uint64_t transfers = 0;
    std::uint64_t exchanged_cells = 0; // host-level halo cells written
    std::uint64_t device_to_host_cells = 0;
    std::uint64_t host_to_device_cells = 0;
};

/// One coarray (or per-image local array) across all images.
struct DistributedArray {
    std::string name;
    int rank = 0;
    int corank = 0;
    std::vector<std::int64_t> shape; // images per codimension
    StorageLayout layout;
    std::vector<Block> blocks; // index = image - 1
    std::uint64_t halo_epoch = 0;

    Block& block(int image) { return blocks.at(static_cast<std::size_t>(image - 1)); }
    const Block& block(int image) const { return blocks.at(static_cast<std::size_t>(image - 1)); }
    /// User index of storage coordinate 0 in dim d (1 - halo_lo).
    std::int64_t lower(int d) const { return 1 - layout.halo_lo[static_cast<std::size_t>(d)]; }
    /// Global interior extent in dim d.
    std::int64_t global_extent(int d) const;
};

/// Zero-initialised blocks with halo padding on every image of the grid.
/// Throws E108 when an interior extent is below 1 or below a halo width.
DistributedArray alloc_coarray(const ProcessGrid& grid, const std::string& name, int corank,
                               const StorageLayout& layout);

/// Same, with an explicit coarray shape (images per codimension, product = images).
DistributedArray alloc_coarray(int images, std::vector<std::int64_t> shape, const std::string& name, int corank,
                               const StorageLayout& layout);

/// Fills every block (interior and halo) from a global array read periodically.
void scatter_global(DistributedArray& a, const GlobalArray& global);

/// Interior cells of every host block, placed by grid coordinate. E202 if
/// some block is unallocated.
GlobalArray gather_global(const DistributedArray& a);

/// Cyclic halo exchange, dimensions in ascending order. Mirrored blocks
/// exchange through the host: border slabs down, exchange, halos back up.
void halo_transfer(DistributedArray& a, TransferCounters& counters);

enum class Order { Forward, Reverse, Shuffle };

struct LaunchOrder {
    Order order = Order::Forward;
    std::uint64_t seed = 0;
};

/// One array argument of a launch: a live buffer and its layout.
struct LaunchBuffer {
    std::vector<double>* data = nullptr;
    const StorageLayout* layout = nullptr;
};

/// Double-buffered execution of a kernel over the index box [lo, hi]
/// (1-based interior indices). Every buffer is snapshotted; reads address the
/// snapshot, stores address the output, which then replaces the live buffer.
/// Returns the number of points evaluated.
std::uint64_t launch_concurrent(const lowering::KernelIR& ir, const std::vector<LaunchBuffer>& buffers,
                                const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                                const std::vector<lowering::Value>& scalar_args, const LaunchOrder& order);

/// Every storage coordinate tuple of a layout in column-major order.
void for_each_cell(const StorageLayout& layout, const std::function<void(const std::vector<std::int64_t>&)>& f);

} // namespace lope::runtime
