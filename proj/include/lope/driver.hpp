#pragma once

#include "lope/frontend/ast.hpp"
#include "lope/lowering/host_plan.hpp"
#include "lope/sema/checks.hpp"

#include <string_view>

namespace lope {

struct Compilation {
    frontend::Program program;
    sema::Analysis analysis;
    DiagnosticList diagnostics; // lex/parse errors, else analysis results

    bool ok() const { return !diagnostics.has_errors(); }
};

/// Parse, then analyze if parsing succeeded.
Compilation compile(std::string_view source, std::string_view file);

/// Host plan for a compilation that is ok().
lowering::HostPlan plan(const Compilation& c);

} // namespace lope
