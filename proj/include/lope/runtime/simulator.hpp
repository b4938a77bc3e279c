#pragma once

#include "lope/frontend/ast.hpp"
#include "lope/lowering/host_plan.hpp"
#include "lope/runtime/distributed.hpp"
#include "lope/runtime/error.hpp"
#include "lope/runtime/global_array.hpp"
#include "lope/sema/symbols.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lope::runtime {

struct RunConfig {
    int images = 1;
    int grid_rows = 1;
    int devices = 0; // subimages per image
    std::int64_t steps = 1;
    std::optional<GlobalArray> input;
    LaunchOrder order;
    std::int64_t default_extent = 32; // global extent per dim without input
};

struct RunStats {
    TransferCounters transfer;
    std::uint64_t barriers = 0;
    std::uint64_t launches = 0;
    std::uint64_t device_launches = 0;
    std::uint64_t points = 0;
    std::uint64_t mirror_copies = 0;
    std::uint64_t stale_launches = 0; // launches that saw a halo older than the last transfer
};

struct RunResult {
    std::optional<GlobalArray> output;
    RunStats stats;
    std::vector<std::map<std::string, lowering::Value>> env; // final scalars, per image
};

/// The array read by `--input` and written by `--output`: the first declared
/// coarray with a halo attribute.
std::optional<std::string> io_array_name(const sema::SymbolTable& symbols);

/// Executes the plan on `config.images` simulated images. Images run
/// round-robin up to each collective (coarray allocate/deallocate and
/// halo_transfer). The output is the I/O array gathered at its deallocation,
/// or at program end if it is still allocated. Throws RuntimeError.
RunResult run_program(const lowering::HostPlan& plan, const sema::SymbolTable& symbols, const RunConfig& config,
                      const SourcePos& program_pos = {});

} // namespace lope::runtime
