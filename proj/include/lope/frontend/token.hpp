#pragma once

#include "lope/diagnostic.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lope::frontend {

enum class TokenKind {
    Ident,
    Keyword,
    Int,
    Real,
    LParen,
    RParen,
    LBrack,
    RBrack,
    DblLBrack,
    DblRBrack,
    Comma,
    Colon,
    DblColon,
    Star,
    Plus,
    Minus,
    Slash,
    Assign,
    EqEq,
    NotEq,
    Less,
    Greater,
    Newline, // end of statement: line break or ';'
    End,
};

std::string_view kind_name(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::End;
    std::string lexeme;  // exactly as written
    std::string text;    // lower-cased for identifiers and keywords
    std::int64_t int_value = 0;
    double real_value = 0.0;
    SourcePos pos;

    bool is(TokenKind k) const { return kind == k; }
    bool is_keyword(std::string_view kw) const { return kind == TokenKind::Keyword && text == kw; }
};

bool is_keyword(std::string_view lowered);

struct LexResult {
    std::vector<Token> tokens; // always terminated by an End token
    DiagnosticList diagnostics;
};

/// Splits free-form source into tokens. `&` at end of line joins the next line;
/// `!` starts a comment. Illegal characters are reported (E001) and skipped.
LexResult tokenize(std::string_view source, std::string_view file = "<input>");

} // namespace lope::frontend
