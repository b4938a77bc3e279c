#include "lope/frontend/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace lope::frontend {
namespace {

constexpr std::array<std::string_view, 21> kKeywords = {
    "program",     "end",        "subroutine",   "pure",          "concurrent", "real",
    "integer",     "logical",    "allocatable",  "dimension",     "codimension", "halo",
    "allocate",    "deallocate", "do",           "call",          "if",         "then",
    "halo_src",    "halo_transfer", "get_subimage",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

class Lexer {
  public:
    Lexer(std::string_view src, std::string_view file) : src_(src), file_(file) {}

    LexResult run()
    {
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '!') {
                skip_comment();
            } else if (c == '\n') {
                newline();
            } else if (c == ';') {
                newline();
            } else if (c == '&') {
                continuation();
            } else if (is_ident_start(c)) {
                word();
            } else if (is_digit(c) || (c == '.' && i_ + 1 < src_.size() && is_digit(src_[i_ + 1]))) {
                number();
            } else {
                punct();
            }
        }
        Token end;
        end.kind = TokenKind::End;
        end.pos = here();
        out_.tokens.push_back(std::move(end));
        return std::move(out_);
    }

  private:
    SourcePos here() const { return {std::string(file_), line_, col_}; }

    void advance()
    {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(src_[i_]) & 0xC0) != 0x80) {
            ++col_; // count code points, not continuation bytes
        }
        ++i_;
    }

    void push(TokenKind kind, std::size_t start, SourcePos pos)
    {
        Token t;
        t.kind = kind;
        t.lexeme = std::string(src_.substr(start, i_ - start));
        t.pos = std::move(pos);
        out_.tokens.push_back(std::move(t));
    }

    void skip_comment()
    {
        while (i_ < src_.size() && src_[i_] != '\n')
            advance();
    }

    void newline()
    {
        SourcePos pos = here();
        std::size_t start = i_;
        advance();
        if (out_.tokens.empty() || out_.tokens.back().kind == TokenKind::Newline)
            return;
        push(TokenKind::Newline, start, std::move(pos));
    }

    // '&' must be the last non-blank, non-comment character on its line.
    void continuation()
    {
        SourcePos pos = here();
        advance();
        std::size_t j = i_;
        while (j < src_.size() && (src_[j] == ' ' || src_[j] == '\t' || src_[j] == '\r'))
            ++j;
        if (j < src_.size() && src_[j] == '!') {
            while (j < src_.size() && src_[j] != '\n')
                ++j;
        }
        if (j < src_.size() && src_[j] != '\n') {
            out_.diagnostics.error(ErrorCode::Lex, pos, "'&' must end a line");
            return;
        }
        while (i_ < j)
            advance();
        if (i_ < src_.size())
            advance(); // the line break
        // optional leading '&' on the continuation line
        std::size_t k = i_;
        while (k < src_.size() && (src_[k] == ' ' || src_[k] == '\t'))
            ++k;
        if (k < src_.size() && src_[k] == '&') {
            while (i_ <= k)
                advance();
        }
    }

    void word()
    {
        SourcePos pos = here();
        std::size_t start = i_;
        while (i_ < src_.size() && is_ident_char(src_[i_]))
            advance();
        push(TokenKind::Ident, start, std::move(pos));
        Token& t = out_.tokens.back();
        t.text = lower(t.lexeme);
        if (is_keyword(t.text))
            t.kind = TokenKind::Keyword;
    }

    void number()
    {
        SourcePos pos = here();
        std::size_t start = i_;
        bool real = false;
        while (i_ < src_.size() && is_digit(src_[i_]))
            advance();
        if (i_ < src_.size() && src_[i_] == '.') {
            real = true;
            advance();
            while (i_ < src_.size() && is_digit(src_[i_]))
                advance();
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E' || src_[i_] == 'd' || src_[i_] == 'D')) {
            std::size_t j = i_ + 1;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-'))
                ++j;
            if (j < src_.size() && is_digit(src_[j])) {
                real = true;
                while (i_ < j)
                    advance();
                while (i_ < src_.size() && is_digit(src_[i_]))
                    advance();
            }
        }
        push(real ? TokenKind::Real : TokenKind::Int, start, pos);
        Token& t = out_.tokens.back();
        std::string text = lower(t.lexeme);
        std::replace(text.begin(), text.end(), 'd', 'e');
        t.text = text;
        errno = 0;
        if (real) {
            t.real_value = std::strtod(text.c_str(), nullptr);
        } else {
            t.int_value = std::strtoll(text.c_str(), nullptr, 10);
        }
        if (errno == ERANGE) {
            out_.diagnostics.error(ErrorCode::Lex, pos, "numeric literal '" + t.lexeme + "' out of range");
            t.real_value = 0.0;
            t.int_value = 0;
        }
        if (i_ < src_.size() && is_ident_char(src_[i_])) {
            out_.diagnostics.error(ErrorCode::Lex, here(), "unexpected character after numeric literal");
            while (i_ < src_.size() && is_ident_char(src_[i_]))
                advance();
        }
    }

    void punct()
    {
        SourcePos pos = here();
        std::size_t start = i_;
        char c = src_[i_];
        char next = i_ + 1 < src_.size() ? src_[i_ + 1] : '\0';
        auto two = [&](TokenKind k) {
            advance();
            advance();
            push(k, start, pos);
        };
        auto one = [&](TokenKind k) {
            advance();
            push(k, start, pos);
        };
        switch (c) {
        case '(': return one(TokenKind::LParen);
        case ')': return one(TokenKind::RParen);
        case '[': return next == '[' ? two(TokenKind::DblLBrack) : one(TokenKind::LBrack);
        case ']': return next == ']' ? two(TokenKind::DblRBrack) : one(TokenKind::RBrack);
        case ',': return one(TokenKind::Comma);
        case ':': return next == ':' ? two(TokenKind::DblColon) : one(TokenKind::Colon);
        case '*': return one(TokenKind::Star);
        case '+': return one(TokenKind::Plus);
        case '-': return one(TokenKind::Minus);
        case '/': return next == '=' ? two(TokenKind::NotEq) : one(TokenKind::Slash);
        case '=': return next == '=' ? two(TokenKind::EqEq) : one(TokenKind::Assign);
        case '<': return one(TokenKind::Less);
        case '>': return one(TokenKind::Greater);
        default: break;
        }
        std::string shown;
        if (static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7F) {
            shown = std::string("'") + c + "'";
        } else {
            char buf[16];
            std::snprintf(buf, sizeof buf, "0x%02X", static_cast<unsigned char>(c));
            shown = buf;
        }
        out_.diagnostics.error(ErrorCode::Lex, pos, "illegal character " + shown);
        advance();
        while (i_ < src_.size() && (static_cast<unsigned char>(src_[i_]) & 0xC0) == 0x80)
            advance();
    }

    std::string_view src_;
    std::string_view file_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
    LexResult out_;
};

} // namespace

std::string_view kind_name(TokenKind kind)
{
    switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Int: return "integer literal";
    case TokenKind::Real: return "real literal";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBrack: return "'['";
    case TokenKind::RBrack: return "']'";
    case TokenKind::DblLBrack: return "'[['";
    case TokenKind::DblRBrack: return "']]'";
    case TokenKind::Comma: return "','";
    case TokenKind::Colon: return "':'";
    case TokenKind::DblColon: return "'::'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Assign: return "'='";
    case TokenKind::EqEq: return "'=='";
    case TokenKind::NotEq: return "'/='";
    case TokenKind::Less: return "'<'";
    case TokenKind::Greater: return "'>'";
    case TokenKind::Newline: return "end of statement";
    case TokenKind::End: return "end of file";
    }
    return "?";
}

bool is_keyword(std::string_view lowered)
{
    return std::find(kKeywords.begin(), kKeywords.end(), lowered) != kKeywords.end();
}

LexResult tokenize(std::string_view source, std::string_view file)
{
    return Lexer(source, file).run();
}

} // namespace lope::frontend
