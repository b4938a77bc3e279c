#include "lope/frontend/parser.hpp"

#include <climits>
#include <vector>

namespace lope::frontend {
namespace {

struct SyntaxError {
    SourcePos pos;
    std::string message;
};

constexpr int kMaxDepth = 200;

bool is_base_type(const Token& t)
{
    return t.is_keyword("real") || t.is_keyword("integer") || t.is_keyword("logical");
}

std::string describe(const Token& t)
{
    switch (t.kind) {
    case TokenKind::Ident:
    case TokenKind::Keyword:
    case TokenKind::Int:
    case TokenKind::Real: return "'" + t.lexeme + "'";
    default: return std::string(kind_name(t.kind));
    }
}

class Parser {
  public:
    explicit Parser(std::span<const Token> tokens)
    {
        toks_.assign(tokens.begin(), tokens.end());
        if (toks_.empty() || !toks_.back().is(TokenKind::End)) {
            Token end;
            end.kind = TokenKind::End;
            if (!toks_.empty())
                end.pos = toks_.back().pos;
            toks_.push_back(std::move(end));
        }
    }

    ParseResult run()
    {
        ParseResult out;
        try {
            parse_program(out.program);
        } catch (const SyntaxError& e) {
            record(e);
        }
        out.diagnostics = std::move(diags_);
        return out;
    }

    HaloParseResult run_halo()
    {
        HaloParseResult out;
        try {
            out.spec = parse_halo_dims();
            if (!check(TokenKind::End))
                fail_expected("',' or end of halo specification");
        } catch (const SyntaxError& e) {
            record(e);
        }
        out.diagnostics = std::move(diags_);
        return out;
    }

  private:
    // -- token helpers ------------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const
    {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }

    const Token& advance()
    {
        const Token& t = peek();
        if (!t.is(TokenKind::End))
            ++pos_;
        return t;
    }

    bool check(TokenKind k, std::size_t ahead = 0) const { return peek(ahead).is(k); }
    bool check_kw(std::string_view kw, std::size_t ahead = 0) const { return peek(ahead).is_keyword(kw); }

    bool accept(TokenKind k)
    {
        if (!check(k))
            return false;
        advance();
        return true;
    }

    bool accept_kw(std::string_view kw)
    {
        if (!check_kw(kw))
            return false;
        advance();
        return true;
    }

    [[noreturn]] void fail(const SourcePos& pos, std::string message) { throw SyntaxError{pos, std::move(message)}; }

    [[noreturn]] void fail_expected(std::string_view expected)
    {
        fail(peek().pos, "expected " + std::string(expected) + ", found " + describe(peek()));
    }

    const Token& expect(TokenKind k)
    {
        if (!check(k))
            fail_expected(kind_name(k));
        return advance();
    }

    const Token& expect_kw(std::string_view kw)
    {
        if (!check_kw(kw))
            fail_expected("'" + std::string(kw) + "'");
        return advance();
    }

    std::string expect_ident()
    {
        if (!check(TokenKind::Ident))
            fail_expected("identifier");
        return advance().text;
    }

    void skip_newlines()
    {
        while (accept(TokenKind::Newline)) {
        }
    }

    void end_of_statement()
    {
        if (check(TokenKind::End))
            return;
        if (!accept(TokenKind::Newline))
            fail_expected("end of statement");
    }

    void sync()
    {
        while (!check(TokenKind::Newline) && !check(TokenKind::End))
            advance();
        accept(TokenKind::Newline);
    }

    void record(const SyntaxError& e) { diags_.error(ErrorCode::Parse, e.pos, e.message); }

    struct DepthGuard {
        DepthGuard(Parser& p, const SourcePos& pos) : p_(p)
        {
            if (++p_.depth_ > kMaxDepth) {
                --p_.depth_;
                p_.fail(pos, "nesting too deep");
            }
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    // -- program units ------------------------------------------------------

    void parse_program(Program& prog)
    {
        skip_newlines();
        bool have_main = false;
        while (!check(TokenKind::End)) {
            in_kernel_ = false;
            try {
                if (check_kw("pure") || check_kw("concurrent")) {
                    prog.kernels.push_back(parse_kernel());
                } else if (check_kw("program")) {
                    if (have_main)
                        fail(peek().pos, "only one main program is allowed");
                    prog.main = parse_main();
                    have_main = true;
                } else {
                    fail_expected("'pure concurrent subroutine' or 'program'");
                }
            } catch (const SyntaxError& e) {
                record(e);
                sync();
                while (!check(TokenKind::End) && !check_kw("pure") && !check_kw("concurrent") &&
                       !check_kw("program"))
                    sync();
            }
            skip_newlines();
            if (have_main && !check(TokenKind::End)) {
                record({peek().pos, "unexpected " + describe(peek()) + " after end of main program"});
                while (!check(TokenKind::End))
                    sync();
            }
        }
        if (!have_main)
            record({peek().pos, "missing main program"});
    }

    KernelDef parse_kernel()
    {
        KernelDef k;
        k.pos = peek().pos;
        bool pure = false;
        bool concurrent = false;
        while (check_kw("pure") || check_kw("concurrent")) {
            bool& flag = check_kw("pure") ? pure : concurrent;
            if (flag)
                fail(peek().pos, "duplicate prefix " + describe(peek()));
            flag = true;
            advance();
        }
        if (!pure)
            fail(k.pos, "concurrent kernels must be declared 'pure'");
        if (!concurrent)
            fail(k.pos, "kernel subroutines must be declared 'concurrent'");
        expect_kw("subroutine");
        k.name = expect_ident();
        expect(TokenKind::LParen);
        k.params.push_back(expect_ident());
        while (accept(TokenKind::Comma))
            k.params.push_back(expect_ident());
        expect(TokenKind::RParen);
        end_of_statement();

        in_kernel_ = true;
        k.decls = parse_declarations();
        k.body = parse_block("subroutine");
        in_kernel_ = false;

        expect_kw("end");
        expect_kw("subroutine");
        if (check(TokenKind::Ident)) {
            const Token& t = advance();
            if (t.text != k.name)
                record({t.pos, "'end subroutine " + t.text + "' does not match subroutine '" + k.name + "'"});
        }
        end_of_statement();
        return k;
    }

    MainDef parse_main()
    {
        MainDef m;
        m.pos = peek().pos;
        expect_kw("program");
        m.name = expect_ident();
        end_of_statement();
        m.decls = parse_declarations();
        m.body = parse_block("program");
        expect_kw("end");
        expect_kw("program");
        if (check(TokenKind::Ident)) {
            const Token& t = advance();
            if (t.text != m.name)
                record({t.pos, "'end program " + t.text + "' does not match program '" + m.name + "'"});
        }
        end_of_statement();
        return m;
    }

    // -- declarations -------------------------------------------------------

    std::vector<TypeDecl> parse_declarations()
    {
        std::vector<TypeDecl> decls;
        skip_newlines();
        while (is_base_type(peek())) {
            try {
                decls.push_back(parse_declaration());
            } catch (const SyntaxError& e) {
                record(e);
                sync();
            }
            skip_newlines();
        }
        return decls;
    }

    TypeDecl parse_declaration()
    {
        TypeDecl d;
        d.pos = peek().pos;
        const Token& base = advance();
        d.base = base.text == "real" ? BaseType::Real : base.text == "integer" ? BaseType::Integer : BaseType::Logical;
        while (accept(TokenKind::Comma))
            parse_attribute(d);
        expect(TokenKind::DblColon);
        do {
            d.entity_pos.push_back(peek().pos);
            d.entities.push_back(expect_ident());
        } while (accept(TokenKind::Comma));
        end_of_statement();
        return d;
    }

    void parse_attribute(TypeDecl& d)
    {
        const Token& t = peek();
        auto once = [&](bool present) {
            if (present)
                fail(t.pos, "duplicate attribute " + describe(t));
        };
        if (accept_kw("allocatable")) {
            once(d.allocatable);
            d.allocatable = true;
        } else if (accept_kw("pure")) {
            once(d.pure);
            d.pure = true;
        } else if (accept_kw("concurrent")) {
            once(d.concurrent);
            d.concurrent = true;
        } else if (accept_kw("dimension")) {
            once(d.dimension.has_value());
            expect(TokenKind::LParen);
            std::vector<DimSpec> dims;
            do {
                dims.push_back(parse_dim_spec());
            } while (accept(TokenKind::Comma));
            expect(TokenKind::RParen);
            d.dimension = std::move(dims);
        } else if (accept_kw("codimension")) {
            once(d.codimension.has_value());
            expect(TokenKind::LBrack);
            std::vector<CodimSpec> dims;
            do {
                CodimSpec c;
                if (check(TokenKind::Colon) && (check(TokenKind::Comma, 1) || check(TokenKind::RBrack, 1))) {
                    advance();
                } else if (accept(TokenKind::Star)) {
                    c.kind = CodimSpec::Kind::Star;
                } else {
                    c.kind = CodimSpec::Kind::Extent;
                    c.extent = parse_expr();
                }
                dims.push_back(std::move(c));
            } while (accept(TokenKind::Comma));
            expect(TokenKind::RBrack);
            d.codimension = std::move(dims);
        } else if (accept_kw("halo")) {
            once(d.halo.has_value());
            expect(TokenKind::LParen);
            d.halo = parse_halo_dims();
            expect(TokenKind::RParen);
        } else {
            fail_expected("attribute");
        }
    }

    DimSpec parse_dim_spec()
    {
        DimSpec s;
        if (check(TokenKind::Colon) && (check(TokenKind::Comma, 1) || check(TokenKind::RParen, 1))) {
            advance();
            return s;
        }
        Expr first = parse_expr();
        if (accept(TokenKind::Colon)) {
            s.lo = std::move(first);
            s.hi = parse_expr();
        } else {
            s.hi = std::move(first);
        }
        return s;
    }

    int parse_halo_extent()
    {
        const Token& start = peek();
        bool negative = false;
        if (accept(TokenKind::Minus))
            negative = true;
        else
            accept(TokenKind::Plus);
        if (!check(TokenKind::Int))
            fail_expected("halo extent (integer literal)");
        const Token& t = advance();
        if (negative && t.int_value != 0)
            fail(start.pos, "halo extents must be non-negative");
        if (t.int_value > INT_MAX)
            fail(t.pos, "halo extent too large");
        return static_cast<int>(t.int_value);
    }

    HaloSpec parse_halo_dims()
    {
        HaloSpec spec;
        do {
            if (check(TokenKind::Colon) &&
                (check(TokenKind::Comma, 1) || check(TokenKind::RParen, 1) || check(TokenKind::End, 1))) {
                advance();
                spec.dims.emplace_back(std::nullopt);
                continue;
            }
            HaloExtent e;
            e.lo = parse_halo_extent();
            expect(TokenKind::Colon);
            expect(TokenKind::Star);
            expect(TokenKind::Colon);
            e.hi = parse_halo_extent();
            spec.dims.emplace_back(e);
        } while (accept(TokenKind::Comma));
        return spec;
    }

    // -- statements ---------------------------------------------------------

    // Parses statements until 'end' (left unconsumed) or end of file.
    std::vector<Stmt> parse_block(std::string_view closer)
    {
        DepthGuard guard(*this, peek().pos);
        std::vector<Stmt> body;
        skip_newlines();
        while (!check_kw("end")) {
            if (check(TokenKind::End))
                fail(peek().pos, "missing 'end " + std::string(closer) + "'");
            try {
                if (is_base_type(peek()))
                    fail(peek().pos, "declaration after executable statement");
                body.push_back(in_kernel_ ? parse_kernel_stmt() : parse_host_stmt());
            } catch (const SyntaxError& e) {
                record(e);
                sync();
            }
            skip_newlines();
        }
        return body;
    }

    Stmt parse_kernel_stmt()
    {
        Stmt s;
        s.pos = peek().pos;
        if (accept_kw("call")) {
            CallKernelStmt call;
            call.kernel = expect_ident();
            call.args = parse_call_args();
            end_of_statement();
            s.node = std::move(call);
            return s;
        }
        if (!check(TokenKind::Ident))
            fail(peek().pos, "only assignments are allowed in a concurrent kernel");
        Expr lhs = parse_primary();
        if (!std::holds_alternative<Ident>(lhs.node) && !std::holds_alternative<OffsetRef>(lhs.node))
            fail(lhs.pos, "invalid assignment target");
        expect(TokenKind::Assign);
        Expr rhs = parse_expr();
        end_of_statement();
        s.node = AssignStmt{std::move(lhs), std::move(rhs)};
        return s;
    }

    Stmt parse_host_stmt()
    {
        const Token& t = peek();
        if (t.is_keyword("allocate"))
            return parse_allocate();
        if (t.is_keyword("deallocate")) {
            Stmt s;
            s.pos = advance().pos;
            expect(TokenKind::LParen);
            DeallocateStmt d{expect_ident()};
            expect(TokenKind::RParen);
            end_of_statement();
            s.node = std::move(d);
            return s;
        }
        if (t.is_keyword("do"))
            return check_kw("concurrent", 1) ? parse_do_concurrent() : parse_do_counted();
        if (t.is_keyword("call"))
            return check_kw("halo_transfer", 1) ? parse_halo_transfer() : parse_host_call();
        if (t.is_keyword("if"))
            return parse_if();
        if (t.is(TokenKind::Ident))
            return parse_assignment();
        fail_expected("statement");
    }

    Stmt parse_allocate()
    {
        Stmt s;
        s.pos = advance().pos;
        AllocateStmt a;
        expect(TokenKind::LParen);
        a.array = expect_ident();
        if (accept(TokenKind::LParen)) {
            do {
                Expr first = parse_expr();
                if (accept(TokenKind::Colon))
                    a.bounds.push_back(AllocBound{std::move(first), parse_expr()});
                else
                    a.bounds.push_back(AllocBound{std::nullopt, std::move(first)});
            } while (accept(TokenKind::Comma));
            expect(TokenKind::RParen);
        }
        if (accept(TokenKind::LBrack)) {
            do {
                if (accept(TokenKind::Star))
                    a.cobounds.push_back(Cobound{std::nullopt});
                else
                    a.cobounds.push_back(Cobound{parse_expr()});
            } while (accept(TokenKind::Comma));
            expect(TokenKind::RBrack);
        }
        if (accept(TokenKind::Comma)) {
            expect_kw("halo_src");
            expect(TokenKind::Assign);
            a.halo_src = expect_ident();
        }
        expect(TokenKind::RParen);
        if (check(TokenKind::DblLBrack))
            a.exec_target = parse_exec_target();
        end_of_statement();
        s.node = std::move(a);
        return s;
    }

    std::string parse_exec_target()
    {
        expect(TokenKind::DblLBrack);
        std::string name = expect_ident();
        expect(TokenKind::DblRBrack);
        return name;
    }

    Stmt parse_do_counted()
    {
        Stmt s;
        s.pos = advance().pos;
        std::string var = expect_ident();
        expect(TokenKind::Assign);
        Expr lo = parse_expr();
        expect(TokenKind::Comma);
        Expr hi = parse_expr();
        end_of_statement();
        std::vector<Stmt> body = parse_block("do");
        expect_kw("end");
        expect_kw("do");
        end_of_statement();
        s.node = DoCountedStmt{std::move(var), std::move(lo), std::move(hi), std::move(body)};
        return s;
    }

    Stmt parse_do_concurrent()
    {
        Stmt s;
        s.pos = advance().pos;
        expect_kw("concurrent");
        DoConcurrentStmt d;
        expect(TokenKind::LParen);
        do {
            IndexRange r{expect_ident(), Expr{}, Expr{}};
            expect(TokenKind::Assign);
            r.lo = parse_expr();
            expect(TokenKind::Colon);
            r.hi = parse_expr();
            for (const auto& other : d.ranges) {
                if (other.var == r.var)
                    fail(s.pos, "index '" + r.var + "' appears twice in do concurrent header");
            }
            d.ranges.push_back(std::move(r));
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RParen);
        if (check(TokenKind::DblLBrack))
            d.exec_target = parse_exec_target();
        end_of_statement();
        skip_newlines();

        d.call_pos = peek().pos;
        expect_kw("call");
        d.call.kernel = expect_ident();
        d.call.args = parse_call_args();
        for (const auto& arg : d.call.args)
            check_launch_argument(arg, d);
        end_of_statement();
        skip_newlines();
        if (!check_kw("end"))
            fail(peek().pos, "a do concurrent body must be a single kernel call");
        expect_kw("end");
        expect_kw("do");
        end_of_statement();
        s.node = std::move(d);
        return s;
    }

    // Array actuals must be the local element `U(i,j)` (optionally `[dev]`),
    // subscripted by the loop indices in header order.
    void check_launch_argument(const Expr& arg, const DoConcurrentStmt& d)
    {
        const auto* ref = std::get_if<SectionRef>(&arg.node);
        if (ref == nullptr)
            return;
        bool ok = ref->subscripts.size() == d.ranges.size();
        for (std::size_t i = 0; ok && i < ref->subscripts.size(); ++i) {
            const auto& sub = ref->subscripts[i];
            const Ident* id = sub.index ? std::get_if<Ident>(&(*sub.index)->node) : nullptr;
            ok = id != nullptr && id->name == d.ranges[i].var;
        }
        if (!ok)
            fail(arg.pos, "kernel argument '" + ref->array + "' must be subscripted by the loop indices in order");
        if (ref->cosubscripts.size() > 1 ||
            (ref->cosubscripts.size() == 1 && !std::holds_alternative<Ident>(ref->cosubscripts[0].node)))
            fail(arg.pos, "kernel argument cosubscript must name a subimage");
    }

    Stmt parse_halo_transfer()
    {
        Stmt s;
        s.pos = advance().pos;
        expect_kw("halo_transfer");
        expect(TokenKind::LParen);
        HaloTransferStmt h;
        h.array = expect_ident();
        expect(TokenKind::Comma);
        const Token& key = peek();
        if (expect_ident() != "bc")
            fail(key.pos, "expected 'BC='");
        expect(TokenKind::Assign);
        const Token& kind = peek();
        if (expect_ident() != "cyclic")
            fail(kind.pos, "unsupported boundary condition '" + kind.lexeme + "'; only CYCLIC is implemented");
        expect(TokenKind::RParen);
        end_of_statement();
        s.node = std::move(h);
        return s;
    }

    Stmt parse_host_call()
    {
        Stmt s;
        s.pos = advance().pos;
        CallKernelStmt call;
        call.kernel = expect_ident();
        call.args = parse_call_args();
        end_of_statement();
        s.node = std::move(call);
        return s;
    }

    Stmt parse_if()
    {
        Stmt s;
        s.pos = advance().pos;
        expect(TokenKind::LParen);
        Expr cond = parse_expr();
        expect(TokenKind::RParen);
        expect_kw("then");
        end_of_statement();
        std::vector<Stmt> body = parse_block("if");
        expect_kw("end");
        expect_kw("if");
        end_of_statement();
        s.node = IfStmt{std::move(cond), std::move(body)};
        return s;
    }

    bool at_statement_end(std::size_t ahead) const
    {
        return check(TokenKind::Newline, ahead) || check(TokenKind::End, ahead);
    }

    Stmt parse_assignment()
    {
        Stmt s;
        s.pos = peek().pos;

        // U[dev] = U
        if (check(TokenKind::LBrack, 1)) {
            std::string array = advance().text;
            advance();
            std::string device = expect_ident();
            expect(TokenKind::RBrack);
            expect(TokenKind::Assign);
            const Token& src = peek();
            if (expect_ident() != array)
                fail(src.pos, "device copy must name the same array on both sides");
            end_of_statement();
            s.node = MirrorAssignStmt{MirrorDirection::HostToDevice, array, device};
            return s;
        }

        Expr lhs = parse_primary();
        if (!std::holds_alternative<Ident>(lhs.node) && !std::holds_alternative<SectionRef>(lhs.node))
            fail(lhs.pos, "invalid assignment target");
        expect(TokenKind::Assign);

        if (check_kw("get_subimage")) {
            const Token& kw = advance();
            const auto* id = std::get_if<Ident>(&lhs.node);
            if (id == nullptr)
                fail(kw.pos, "GET_SUBIMAGE result must be assigned to a scalar variable");
            expect(TokenKind::LParen);
            if (!check(TokenKind::Int))
                fail_expected("device number (integer literal)");
            const Token& k = advance();
            if (k.int_value < 1)
                fail(k.pos, "device number must be at least 1");
            expect(TokenKind::RParen);
            end_of_statement();
            s.node = AssignSubimageStmt{id->name, k.int_value};
            return s;
        }

        // U = U[dev]
        if (check(TokenKind::Ident) && check(TokenKind::LBrack, 1) && check(TokenKind::Ident, 2) &&
            check(TokenKind::RBrack, 3) && at_statement_end(4)) {
            const Token& src = advance();
            advance();
            std::string device = advance().text;
            advance();
            const auto* id = std::get_if<Ident>(&lhs.node);
            if (id == nullptr || id->name != src.text)
                fail(src.pos, "device copy must name the same array on both sides");
            end_of_statement();
            s.node = MirrorAssignStmt{MirrorDirection::DeviceToHost, src.text, device};
            return s;
        }

        Expr rhs = parse_expr();
        end_of_statement();
        s.node = AssignStmt{std::move(lhs), std::move(rhs)};
        return s;
    }

    std::vector<Expr> parse_call_args()
    {
        std::vector<Expr> args;
        expect(TokenKind::LParen);
        if (accept(TokenKind::RParen))
            return args;
        do {
            args.push_back(parse_expr());
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RParen);
        return args;
    }

    // -- expressions --------------------------------------------------------

    Expr parse_expr()
    {
        DepthGuard guard(*this, peek().pos);
        Expr lhs = parse_additive();
        CompareOp op;
        if (check(TokenKind::EqEq))
            op = CompareOp::Eq;
        else if (check(TokenKind::NotEq))
            op = CompareOp::Ne;
        else if (check(TokenKind::Less))
            op = CompareOp::Lt;
        else if (check(TokenKind::Greater))
            op = CompareOp::Gt;
        else
            return lhs;
        advance();
        Expr rhs = parse_additive();
        SourcePos pos = lhs.pos;
        return Expr{CompareExpr{op, std::move(lhs), std::move(rhs)}, std::move(pos)};
    }

    Expr parse_additive()
    {
        Expr lhs;
        if (check(TokenKind::Plus) || check(TokenKind::Minus)) {
            const Token& sign = advance();
            Expr term = parse_term();
            if (sign.is(TokenKind::Minus))
                lhs = Expr{NegExpr{std::move(term)}, sign.pos};
            else
                lhs = std::move(term);
        } else {
            lhs = parse_term();
        }
        while (check(TokenKind::Plus) || check(TokenKind::Minus)) {
            BinaryOp op = advance().is(TokenKind::Plus) ? BinaryOp::Add : BinaryOp::Sub;
            Expr rhs = parse_term();
            SourcePos pos = lhs.pos;
            lhs = Expr{BinaryExpr{op, std::move(lhs), std::move(rhs)}, std::move(pos)};
        }
        return lhs;
    }

    Expr parse_term()
    {
        Expr lhs = parse_primary();
        while (check(TokenKind::Star) || check(TokenKind::Slash)) {
            BinaryOp op = advance().is(TokenKind::Star) ? BinaryOp::Mul : BinaryOp::Div;
            Expr rhs = parse_primary();
            SourcePos pos = lhs.pos;
            lhs = Expr{BinaryExpr{op, std::move(lhs), std::move(rhs)}, std::move(pos)};
        }
        return lhs;
    }

    Expr parse_primary()
    {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::Int: advance(); return Expr{IntLit{t.int_value}, t.pos};
        case TokenKind::Real: advance(); return Expr{RealLit{t.real_value}, t.pos};
        case TokenKind::LParen: {
            advance();
            Expr inner = parse_expr();
            expect(TokenKind::RParen);
            return inner;
        }
        case TokenKind::Ident: return parse_name();
        default: fail_expected("expression");
        }
    }

    Expr parse_name()
    {
        const Token& t = advance();
        if (!check(TokenKind::LParen)) {
            if (check(TokenKind::LBrack))
                fail(peek().pos, "coindexed reference requires subscripts");
            return Expr{Ident{t.text}, t.pos};
        }
        if (auto fn = intrinsic_from_name(t.text)) {
            IntrinsicCall call{*fn, parse_call_args()};
            return Expr{std::move(call), t.pos};
        }
        if (in_kernel_)
            return parse_offset_ref(t);
        return parse_section_ref(t);
    }

    Expr parse_offset_ref(const Token& name)
    {
        OffsetRef ref{name.text, {}};
        expect(TokenKind::LParen);
        do {
            bool negative = false;
            if (check(TokenKind::Minus) || check(TokenKind::Plus))
                negative = advance().is(TokenKind::Minus);
            if (!check(TokenKind::Int) || !(check(TokenKind::Comma, 1) || check(TokenKind::RParen, 1)))
                fail(peek().pos, "array offsets in a concurrent kernel must be integer literals");
            std::int64_t v = advance().int_value;
            ref.offsets.push_back(negative ? -v : v);
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RParen);
        if (check(TokenKind::LBrack) || check(TokenKind::DblLBrack))
            fail(peek().pos, "coindexed references are not allowed in a concurrent kernel");
        return Expr{std::move(ref), name.pos};
    }

    Expr parse_section_ref(const Token& name)
    {
        SectionRef ref;
        ref.array = name.text;
        expect(TokenKind::LParen);
        do {
            Subscript sub;
            if (check(TokenKind::Colon) && (check(TokenKind::Comma, 1) || check(TokenKind::RParen, 1)))
                advance();
            else
                sub.index = parse_expr();
            ref.subscripts.push_back(std::move(sub));
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RParen);
        if (accept(TokenKind::LBrack)) {
            do {
                ref.cosubscripts.push_back(parse_expr());
            } while (accept(TokenKind::Comma));
            expect(TokenKind::RBrack);
        }
        return Expr{std::move(ref), name.pos};
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    bool in_kernel_ = false;
    DiagnosticList diags_;
};

} // namespace

HaloParseResult parse_halo_spec(std::span<const Token> tokens)
{
    return Parser(tokens).run_halo();
}

ParseResult parse(std::span<const Token> tokens)
{
    return Parser(tokens).run();
}

ParseResult parse_source(std::string_view source, std::string_view file)
{
    LexResult lexed = tokenize(source, file);
    ParseResult result = parse(lexed.tokens);
    DiagnosticList all = std::move(lexed.diagnostics);
    all.append(result.diagnostics);
    result.diagnostics = std::move(all);
    return result;
}

} // namespace lope::frontend
