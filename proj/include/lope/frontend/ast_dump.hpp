#pragma once

#include "lope/frontend/ast.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace lope::frontend {

/// Deterministic prefix-term rendering of a program, one statement per line:
///
///   Program([
///     Kernel("laplacian",["u"],[
///       Decl(Real,[Halo([Deferred,Deferred])],["u"])
///     ],[
///       Assign(OffsetRef("u",[0,0]),Add(...))
///     ])
///   ],[
///     Main("heat"),
///     ...
///   ])
///
/// Source positions are not part of the dump.
std::string dump_ast(const Program& program);

/// Single-line term for one expression.
std::string dump_expr(const Expr& expr);

struct AstReadResult {
    std::optional<Program> program;
    std::string error;
};

/// Inverse of dump_ast (modulo source positions).
AstReadResult read_ast_dump(std::string_view text);

/// Infix, lower-case source spelling of an expression, e.g. `u(1, :)[pcol + 1, prow]`.
std::string to_source(const Expr& expr);

/// Shortest decimal that reads back to the same double.
std::string format_real(double value);

} // namespace lope::frontend
