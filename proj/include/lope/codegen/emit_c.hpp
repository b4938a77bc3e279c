#pragma once

#include "lope/lowering/kernel_ir.hpp"

#include <stdexcept>
#include <string>

namespace lope::codegen {

struct EmitConfig {
    std::string real_c_type = "float"; // float or double
};

struct UnsupportedType : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// OpenCL-C kernel for one KernelIR. Signature, per array `a` of rank r:
///   a_in, a_out buffers; then m0..m{r-1} interior extents, base0.. range
///   starts, a_lo<d>/a_hi<d> halo widths, then scalar parameters.
/// Work item (g0, g1, ...) evaluates interior point base_d + g_d.
std::string emit_kernel_source(const lowering::KernelIR& ir, const EmitConfig& config = {});

} // namespace lope::codegen
