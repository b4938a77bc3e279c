#pragma once

#include "lope/frontend/ast.hpp"
#include "lope/frontend/token.hpp"

#include <span>
#include <string_view>

namespace lope::frontend {

struct HaloParseResult {
    HaloSpec spec;
    DiagnosticList diagnostics;
};

/// Parses the inside of a halo attribute, e.g. the tokens of `1:*:1, :`.
HaloParseResult parse_halo_spec(std::span<const Token> tokens);

struct ParseResult {
    Program program;
    DiagnosticList diagnostics;
};

/// Recursive-descent parser for the LOPe/CAFe subset. Never throws; syntax errors
/// become E002 diagnostics and parsing resumes at the next statement.
ParseResult parse(std::span<const Token> tokens);

/// tokenize + parse, merging diagnostics.
ParseResult parse_source(std::string_view source, std::string_view file = "<input>");

} // namespace lope::frontend
