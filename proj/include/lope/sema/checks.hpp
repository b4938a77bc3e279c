#pragma once

#include "lope/sema/symbols.hpp"

#include <map>
#include <string>
#include <vector>

namespace lope::sema {

/// Largest offsets a kernel reads in one dimension, both stored as magnitudes.
struct FootprintDim {
    int max_neg = 0;
    int max_pos = 0;
    bool operator==(const FootprintDim&) const = default;
};

using Footprint = std::vector<FootprintDim>;

struct KernelCheck {
    std::map<std::string, Footprint> footprints; // array parameter -> footprint
    DiagnosticList diagnostics;
};

/// Enforces the kernel constraints (E101, E103, E104, plus E102 against an
/// explicit formal halo) and computes the per-array footprint.
KernelCheck check_kernel(const frontend::KernelDef& kernel, const SymbolTable& symbols);

/// Empty iff every dimension's footprint fits inside the actual halo.
DiagnosticList check_footprint(const Footprint& footprint, const HaloSpec& actual, const SourcePos& pos,
                               const std::string& array);

/// Host-program constraints: E104 (kernel call outside do concurrent), E105,
/// E106, E107, E108, plus E011/E012 for launch arguments.
DiagnosticList check_host(const frontend::Program& program, const SymbolTable& symbols);

struct Analysis {
    SymbolTable symbols;
    std::map<std::string, std::map<std::string, Footprint>> footprints; // kernel -> array -> footprint
    DiagnosticList diagnostics; // sorted by position
};

/// Runs every semantic pass and returns position-sorted diagnostics.
Analysis analyze(const frontend::Program& program);

} // namespace lope::sema
