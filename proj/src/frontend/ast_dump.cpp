#include "lope/frontend/ast_dump.hpp"

#include <charconv>
#include <cstdlib>
#include <system_error>

namespace lope::frontend {

std::string format_real(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

// ===========================================================================
// Writer

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string binary_name(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return "Add";
    case BinaryOp::Sub: return "Sub";
    case BinaryOp::Mul: return "Mul";
    case BinaryOp::Div: return "Div";
    }
    return "?";
}

std::string compare_name(CompareOp op)
{
    switch (op) {
    case CompareOp::Ne: return "Ne";
    case CompareOp::Eq: return "Eq";
    case CompareOp::Lt: return "Lt";
    case CompareOp::Gt: return "Gt";
    }
    return "?";
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& render)
{
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != 0)
            out += ',';
        out += render(items[i]);
    }
    return out + "]";
}

std::string term(const Expr& e);

std::string opt_name(const std::optional<std::string>& s)
{
    return s ? "Some(" + quote(*s) + ")" : "None";
}

std::string term(const Expr& e)
{
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RealLit>) {
                return "RealLit(" + format_real(n.value) + ")";
            } else if constexpr (std::is_same_v<T, IntLit>) {
                return "IntLit(" + std::to_string(n.value) + ")";
            } else if constexpr (std::is_same_v<T, Ident>) {
                return "Ident(" + quote(n.name) + ")";
            } else if constexpr (std::is_same_v<T, OffsetRef>) {
                return "OffsetRef(" + quote(n.array) + "," +
                       join(n.offsets, [](std::int64_t o) { return std::to_string(o); }) + ")";
            } else if constexpr (std::is_same_v<T, SectionRef>) {
                return "SectionRef(" + quote(n.array) + "," +
                       join(n.subscripts,
                            [](const Subscript& s) { return s.index ? "Index(" + term(**s.index) + ")" : std::string("All"); }) +
                       "," + join(n.cosubscripts, [](const Expr& c) { return term(c); }) + ")";
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                return binary_name(n.op) + "(" + term(*n.lhs) + "," + term(*n.rhs) + ")";
            } else if constexpr (std::is_same_v<T, CompareExpr>) {
                return compare_name(n.op) + "(" + term(*n.lhs) + "," + term(*n.rhs) + ")";
            } else if constexpr (std::is_same_v<T, NegExpr>) {
                return "Neg(" + term(*n.operand) + ")";
            } else {
                return "Intrinsic(" + quote(intrinsic_name(n.fn)) + "," +
                       join(n.args, [](const Expr& a) { return term(a); }) + ")";
            }
        },
        e.node);
}

std::string base_name(BaseType b)
{
    switch (b) {
    case BaseType::Real: return "Real";
    case BaseType::Integer: return "Integer";
    case BaseType::Logical: return "Logical";
    }
    return "?";
}

std::string decl_term(const TypeDecl& d)
{
    std::vector<std::string> attrs;
    if (d.allocatable)
        attrs.emplace_back("Allocatable");
    if (d.pure)
        attrs.emplace_back("Pure");
    if (d.concurrent)
        attrs.emplace_back("Concurrent");
    if (d.dimension) {
        attrs.push_back("Dimension(" + join(*d.dimension, [](const DimSpec& s) -> std::string {
                            if (!s.hi)
                                return "Deferred";
                            if (!s.lo)
                                return "Extent(" + term(*s.hi) + ")";
                            return "Range(" + term(*s.lo) + "," + term(*s.hi) + ")";
                        }) + ")");
    }
    if (d.codimension) {
        attrs.push_back("Codimension(" + join(*d.codimension, [](const CodimSpec& c) -> std::string {
                            switch (c.kind) {
                            case CodimSpec::Kind::Deferred: return "Deferred";
                            case CodimSpec::Kind::Star: return "Star";
                            case CodimSpec::Kind::Extent: return "Extent(" + term(*c.extent) + ")";
                            }
                            return "?";
                        }) + ")");
    }
    if (d.halo) {
        attrs.push_back("Halo(" + join(d.halo->dims, [](const std::optional<HaloExtent>& h) -> std::string {
                            if (!h)
                                return "Deferred";
                            return "Explicit(" + std::to_string(h->lo) + "," + std::to_string(h->hi) + ")";
                        }) + ")");
    }
    return "Decl(" + base_name(d.base) + "," + join(attrs, [](const std::string& s) { return s; }) + "," +
           join(d.entities, [](const std::string& s) { return quote(s); }) + ")";
}

class Writer {
  public:
    std::string out;

    void indent(int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

    // Writes "[\n item,\n item\n<indent>]" or "[]".
    template <typename T, typename F>
    void block(const std::vector<T>& items, int depth, F&& item)
    {
        if (items.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < items.size(); ++i) {
            indent(depth + 1);
            item(items[i], depth + 1);
            if (i + 1 != items.size())
                out += ',';
            out += '\n';
        }
        indent(depth);
        out += ']';
    }

    void stmt(const Stmt& s, int depth)
    {
        std::visit([&](const auto& n) { write(n, depth); }, s.node);
    }

    void stmts(const std::vector<Stmt>& body, int depth)
    {
        block(body, depth, [&](const Stmt& s, int d) { stmt(s, d); });
    }

    void write(const AssignStmt& n, int) { out += "Assign(" + term(n.lhs) + "," + term(n.rhs) + ")"; }

    void write(const AllocateStmt& n, int)
    {
        out += "Allocate(" + quote(n.array) + "," + join(n.bounds, [](const AllocBound& b) -> std::string {
                   if (!b.lo)
                       return "Extent(" + term(b.hi) + ")";
                   return "Range(" + term(*b.lo) + "," + term(b.hi) + ")";
               });
        out += "," + join(n.cobounds, [](const Cobound& c) -> std::string {
                   return c.extent ? "Extent(" + term(*c.extent) + ")" : std::string("Star");
               });
        out += "," + opt_name(n.halo_src) + "," + opt_name(n.exec_target) + ")";
    }

    void write(const DeallocateStmt& n, int) { out += "Deallocate(" + quote(n.array) + ")"; }

    void write(const DoCountedStmt& n, int depth)
    {
        out += "DoCounted(" + quote(n.var) + "," + term(n.lo) + "," + term(n.hi) + ",";
        stmts(n.body, depth);
        out += ")";
    }

    void write(const DoConcurrentStmt& n, int)
    {
        out += "DoConcurrent(" + join(n.ranges, [](const IndexRange& r) {
                   return "Range(" + quote(r.var) + "," + term(r.lo) + "," + term(r.hi) + ")";
               });
        out += "," + opt_name(n.exec_target) + ",Call(" + quote(n.call.kernel) + "," +
               join(n.call.args, [](const Expr& a) { return term(a); }) + "))";
    }

    void write(const HaloTransferStmt& n, int) { out += "HaloTransfer(" + quote(n.array) + ",Cyclic)"; }

    void write(const CallKernelStmt& n, int)
    {
        out += "CallKernel(" + quote(n.kernel) + "," + join(n.args, [](const Expr& a) { return term(a); }) + ")";
    }

    void write(const IfStmt& n, int depth)
    {
        out += "If(" + term(n.cond) + ",";
        stmts(n.body, depth);
        out += ")";
    }

    void write(const AssignSubimageStmt& n, int)
    {
        out += "AssignSubimage(" + quote(n.var) + "," + std::to_string(n.device) + ")";
    }

    void write(const MirrorAssignStmt& n, int)
    {
        out += std::string("MirrorAssign(") +
               (n.direction == MirrorDirection::DeviceToHost ? "DeviceToHost" : "HostToDevice") + "," +
               quote(n.array) + "," + quote(n.device) + ")";
    }

    void kernel(const KernelDef& k, int depth)
    {
        out += "Kernel(" + quote(k.name) + "," + join(k.params, [](const std::string& p) { return quote(p); }) + ",";
        block(k.decls, depth, [&](const TypeDecl& d, int) { out += decl_term(d); });
        out += ",";
        stmts(k.body, depth);
        out += ")";
    }

    void program(const Program& p)
    {
        out += "Program(";
        block(p.kernels, 0, [&](const KernelDef& k, int d) { kernel(k, d); });
        out += ",";
        const MainDef& m = p.main;
        if (m.name.empty() && m.decls.empty() && m.body.empty()) {
            out += "[]";
        } else {
            out += "[\n";
            indent(1);
            out += "Main(" + quote(m.name) + ")";
            for (const auto& d : m.decls) {
                out += ",\n";
                indent(1);
                out += decl_term(d);
            }
            for (const auto& s : m.body) {
                out += ",\n";
                indent(1);
                stmt(s, 1);
            }
            out += "\n]";
        }
        out += ")\n";
    }
};

// ===========================================================================
// Reader

struct Term {
    enum class Kind { App, String, Number, List } kind = Kind::App;
    std::string text;       // constructor name, string contents, or number spelling
    bool has_args = false;  // App written with parentheses
    std::vector<Term> args; // App arguments or List items
};

struct TermError {
    std::string message;
};

class TermParser {
  public:
    explicit TermParser(std::string_view s) : s_(s) {}

    Term parse_all()
    {
        Term t = parse();
        skip_ws();
        if (i_ != s_.size())
            fail("trailing characters");
        return t;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) { throw TermError{msg + " at offset " + std::to_string(i_)}; }

    void skip_ws()
    {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\n' || s_[i_] == '\t' || s_[i_] == '\r'))
            ++i_;
    }

    bool eat(char c)
    {
        skip_ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    std::vector<Term> items(char close)
    {
        std::vector<Term> out;
        if (eat(close))
            return out;
        do {
            out.push_back(parse());
        } while (eat(','));
        if (!eat(close))
            fail(std::string("expected '") + close + "'");
        return out;
    }

    Term parse()
    {
        if (++depth_ > 10000)
            fail("nesting too deep");
        skip_ws();
        if (i_ >= s_.size())
            fail("unexpected end of input");
        Term t;
        char c = s_[i_];
        if (c == '[') {
            ++i_;
            t.kind = Term::Kind::List;
            t.args = items(']');
        } else if (c == '"') {
            ++i_;
            t.kind = Term::Kind::String;
            while (i_ < s_.size() && s_[i_] != '"') {
                if (s_[i_] == '\\' && i_ + 1 < s_.size())
                    ++i_;
                t.text += s_[i_++];
            }
            if (i_ >= s_.size())
                fail("unterminated string");
            ++i_;
        } else if (c == '-' || (c >= '0' && c <= '9')) {
            t.kind = Term::Kind::Number;
            std::size_t start = i_++;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                                      s_[i_] == '+' || s_[i_] == '-'))
                ++i_;
            t.text = std::string(s_.substr(start, i_ - start));
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
                ++i_;
            t.text = std::string(s_.substr(start, i_ - start));
            if (eat('(')) {
                t.has_args = true;
                t.args = items(')');
            }
        } else {
            fail(std::string("unexpected character '") + c + "'");
        }
        --depth_;
        return t;
    }

    std::string_view s_;
    std::size_t i_ = 0;
    int depth_ = 0;
};

[[noreturn]] void bad(const Term& t, const std::string& what)
{
    throw TermError{"malformed " + what + " term '" + t.text + "'"};
}

const std::vector<Term>& app(const Term& t, std::string_view name, std::size_t arity)
{
    if (t.kind != Term::Kind::App || t.text != name || t.args.size() != arity)
        bad(t, std::string(name));
    return t.args;
}

const std::vector<Term>& list(const Term& t)
{
    if (t.kind != Term::Kind::List)
        bad(t, "list");
    return t.args;
}

std::string str(const Term& t)
{
    if (t.kind != Term::Kind::String)
        bad(t, "string");
    return t.text;
}

std::int64_t integer(const Term& t)
{
    std::int64_t v = 0;
    if (t.kind != Term::Kind::Number)
        bad(t, "integer");
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        bad(t, "integer");
    return v;
}

double real(const Term& t)
{
    if (t.kind != Term::Kind::Number)
        bad(t, "real");
    char* end = nullptr;
    double v = std::strtod(t.text.c_str(), &end);
    if (end != t.text.c_str() + t.text.size())
        bad(t, "real");
    return v;
}

bool is_app(const Term& t, std::string_view name) { return t.kind == Term::Kind::App && t.text == name; }

Expr expr_of(const Term& t);

std::vector<Expr> exprs_of(const Term& t)
{
    std::vector<Expr> out;
    for (const auto& a : list(t))
        out.push_back(expr_of(a));
    return out;
}

std::optional<std::string> opt_name_of(const Term& t)
{
    if (is_app(t, "None") && !t.has_args)
        return std::nullopt;
    return str(app(t, "Some", 1)[0]);
}

Expr expr_of(const Term& t)
{
    if (t.kind != Term::Kind::App)
        bad(t, "expression");
    const std::string& n = t.text;
    if (n == "RealLit")
        return Expr{RealLit{real(app(t, n, 1)[0])}, {}};
    if (n == "IntLit")
        return Expr{IntLit{integer(app(t, n, 1)[0])}, {}};
    if (n == "Ident")
        return Expr{Ident{str(app(t, n, 1)[0])}, {}};
    if (n == "OffsetRef") {
        const auto& a = app(t, n, 2);
        OffsetRef r{str(a[0]), {}};
        for (const auto& o : list(a[1]))
            r.offsets.push_back(integer(o));
        return Expr{std::move(r), {}};
    }
    if (n == "SectionRef") {
        const auto& a = app(t, n, 3);
        SectionRef r;
        r.array = str(a[0]);
        for (const auto& s : list(a[1])) {
            Subscript sub;
            if (is_app(s, "Index"))
                sub.index = ExprBox(expr_of(app(s, "Index", 1)[0]));
            else if (!(is_app(s, "All") && !s.has_args))
                bad(s, "subscript");
            r.subscripts.push_back(std::move(sub));
        }
        r.cosubscripts = exprs_of(a[2]);
        return Expr{std::move(r), {}};
    }
    for (auto [name, op] : {std::pair{"Add", BinaryOp::Add}, std::pair{"Sub", BinaryOp::Sub},
                            std::pair{"Mul", BinaryOp::Mul}, std::pair{"Div", BinaryOp::Div}}) {
        if (n == name) {
            const auto& a = app(t, n, 2);
            return Expr{BinaryExpr{op, expr_of(a[0]), expr_of(a[1])}, {}};
        }
    }
    for (auto [name, op] : {std::pair{"Ne", CompareOp::Ne}, std::pair{"Eq", CompareOp::Eq},
                            std::pair{"Lt", CompareOp::Lt}, std::pair{"Gt", CompareOp::Gt}}) {
        if (n == name) {
            const auto& a = app(t, n, 2);
            return Expr{CompareExpr{op, expr_of(a[0]), expr_of(a[1])}, {}};
        }
    }
    if (n == "Neg")
        return Expr{NegExpr{expr_of(app(t, n, 1)[0])}, {}};
    if (n == "Intrinsic") {
        const auto& a = app(t, n, 2);
        auto fn = intrinsic_from_name(str(a[0]));
        if (!fn)
            bad(a[0], "intrinsic");
        return Expr{IntrinsicCall{*fn, exprs_of(a[1])}, {}};
    }
    bad(t, "expression");
}

TypeDecl decl_of(const Term& t)
{
    const auto& a = app(t, "Decl", 3);
    TypeDecl d;
    if (is_app(a[0], "Real"))
        d.base = BaseType::Real;
    else if (is_app(a[0], "Integer"))
        d.base = BaseType::Integer;
    else if (is_app(a[0], "Logical"))
        d.base = BaseType::Logical;
    else
        bad(a[0], "type");
    for (const auto& attr : list(a[1])) {
        if (is_app(attr, "Allocatable")) {
            d.allocatable = true;
        } else if (is_app(attr, "Pure")) {
            d.pure = true;
        } else if (is_app(attr, "Concurrent")) {
            d.concurrent = true;
        } else if (is_app(attr, "Dimension")) {
            std::vector<DimSpec> dims;
            for (const auto& s : list(app(attr, "Dimension", 1)[0])) {
                DimSpec ds;
                if (is_app(s, "Extent")) {
                    ds.hi = expr_of(app(s, "Extent", 1)[0]);
                } else if (is_app(s, "Range")) {
                    ds.lo = expr_of(app(s, "Range", 2)[0]);
                    ds.hi = expr_of(s.args[1]);
                } else if (!is_app(s, "Deferred")) {
                    bad(s, "dimension");
                }
                dims.push_back(std::move(ds));
            }
            d.dimension = std::move(dims);
        } else if (is_app(attr, "Codimension")) {
            std::vector<CodimSpec> dims;
            for (const auto& s : list(app(attr, "Codimension", 1)[0])) {
                CodimSpec c;
                if (is_app(s, "Star")) {
                    c.kind = CodimSpec::Kind::Star;
                } else if (is_app(s, "Extent")) {
                    c.kind = CodimSpec::Kind::Extent;
                    c.extent = expr_of(app(s, "Extent", 1)[0]);
                } else if (!is_app(s, "Deferred")) {
                    bad(s, "codimension");
                }
                dims.push_back(std::move(c));
            }
            d.codimension = std::move(dims);
        } else if (is_app(attr, "Halo")) {
            HaloSpec h;
            for (const auto& s : list(app(attr, "Halo", 1)[0])) {
                if (is_app(s, "Deferred")) {
                    h.dims.emplace_back(std::nullopt);
                } else {
                    const auto& e = app(s, "Explicit", 2);
                    h.dims.emplace_back(HaloExtent{static_cast<int>(integer(e[0])), static_cast<int>(integer(e[1]))});
                }
            }
            d.halo = std::move(h);
        } else {
            bad(attr, "attribute");
        }
    }
    for (const auto& e : list(a[2])) {
        d.entities.push_back(str(e));
        d.entity_pos.emplace_back();
    }
    return d;
}

Stmt stmt_of(const Term& t);

std::vector<Stmt> stmts_of(const Term& t)
{
    std::vector<Stmt> out;
    for (const auto& s : list(t))
        out.push_back(stmt_of(s));
    return out;
}

Stmt stmt_of(const Term& t)
{
    if (t.kind != Term::Kind::App)
        bad(t, "statement");
    const std::string& n = t.text;
    Stmt s;
    if (n == "Assign") {
        const auto& a = app(t, n, 2);
        s.node = AssignStmt{expr_of(a[0]), expr_of(a[1])};
    } else if (n == "Allocate") {
        const auto& a = app(t, n, 5);
        AllocateStmt al;
        al.array = str(a[0]);
        for (const auto& b : list(a[1])) {
            if (is_app(b, "Extent"))
                al.bounds.push_back(AllocBound{std::nullopt, expr_of(app(b, "Extent", 1)[0])});
            else
                al.bounds.push_back(AllocBound{expr_of(app(b, "Range", 2)[0]), expr_of(b.args[1])});
        }
        for (const auto& c : list(a[2])) {
            if (is_app(c, "Star"))
                al.cobounds.push_back(Cobound{std::nullopt});
            else
                al.cobounds.push_back(Cobound{expr_of(app(c, "Extent", 1)[0])});
        }
        al.halo_src = opt_name_of(a[3]);
        al.exec_target = opt_name_of(a[4]);
        s.node = std::move(al);
    } else if (n == "Deallocate") {
        s.node = DeallocateStmt{str(app(t, n, 1)[0])};
    } else if (n == "DoCounted") {
        const auto& a = app(t, n, 4);
        s.node = DoCountedStmt{str(a[0]), expr_of(a[1]), expr_of(a[2]), stmts_of(a[3])};
    } else if (n == "DoConcurrent") {
        const auto& a = app(t, n, 3);
        DoConcurrentStmt d;
        for (const auto& r : list(a[0])) {
            const auto& ra = app(r, "Range", 3);
            d.ranges.push_back(IndexRange{str(ra[0]), expr_of(ra[1]), expr_of(ra[2])});
        }
        d.exec_target = opt_name_of(a[1]);
        const auto& call = app(a[2], "Call", 2);
        d.call.kernel = str(call[0]);
        d.call.args = exprs_of(call[1]);
        s.node = std::move(d);
    } else if (n == "HaloTransfer") {
        const auto& a = app(t, n, 2);
        if (!is_app(a[1], "Cyclic"))
            bad(a[1], "boundary");
        s.node = HaloTransferStmt{str(a[0]), BoundaryKind::Cyclic};
    } else if (n == "CallKernel") {
        const auto& a = app(t, n, 2);
        s.node = CallKernelStmt{str(a[0]), exprs_of(a[1])};
    } else if (n == "If") {
        const auto& a = app(t, n, 2);
        s.node = IfStmt{expr_of(a[0]), stmts_of(a[1])};
    } else if (n == "AssignSubimage") {
        const auto& a = app(t, n, 2);
        s.node = AssignSubimageStmt{str(a[0]), integer(a[1])};
    } else if (n == "MirrorAssign") {
        const auto& a = app(t, n, 3);
        MirrorDirection dir = MirrorDirection::DeviceToHost;
        if (is_app(a[0], "HostToDevice"))
            dir = MirrorDirection::HostToDevice;
        else if (!is_app(a[0], "DeviceToHost"))
            bad(a[0], "direction");
        s.node = MirrorAssignStmt{dir, str(a[1]), str(a[2])};
    } else {
        bad(t, "statement");
    }
    return s;
}

Program program_of(const Term& t)
{
    const auto& a = app(t, "Program", 2);
    Program p;
    for (const auto& k : list(a[0])) {
        const auto& ka = app(k, "Kernel", 4);
        KernelDef kd;
        kd.name = str(ka[0]);
        for (const auto& param : list(ka[1]))
            kd.params.push_back(str(param));
        for (const auto& d : list(ka[2]))
            kd.decls.push_back(decl_of(d));
        kd.body = stmts_of(ka[3]);
        p.kernels.push_back(std::move(kd));
    }
    const auto& items = list(a[1]);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Term& it = items[i];
        if (i == 0) {
            p.main.name = str(app(it, "Main", 1)[0]);
        } else if (is_app(it, "Decl")) {
            if (!p.main.body.empty())
                bad(it, "declaration after statement");
            p.main.decls.push_back(decl_of(it));
        } else {
            p.main.body.push_back(stmt_of(it));
        }
    }
    return p;
}

// ===========================================================================
// Infix printer

int precedence(const Expr& e)
{
    if (const auto* b = std::get_if<BinaryExpr>(&e.node))
        return (b->op == BinaryOp::Add || b->op == BinaryOp::Sub) ? 2 : 3;
    if (std::holds_alternative<CompareExpr>(e.node))
        return 1;
    if (std::holds_alternative<NegExpr>(e.node))
        return 2;
    return 4;
}

std::string src(const Expr& e);

std::string wrap(const Expr& e, int min_prec)
{
    std::string s = src(e);
    return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string src_list(const std::vector<Expr>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i != 0)
            out += ", ";
        out += src(xs[i]);
    }
    return out;
}

std::string src(const Expr& e)
{
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RealLit>) {
                std::string s = format_real(n.value);
                if (s.find_first_of(".e") == std::string::npos)
                    s += ".0";
                return s;
            } else if constexpr (std::is_same_v<T, IntLit>) {
                return std::to_string(n.value);
            } else if constexpr (std::is_same_v<T, Ident>) {
                return n.name;
            } else if constexpr (std::is_same_v<T, OffsetRef>) {
                std::string out = n.array + "(";
                for (std::size_t i = 0; i < n.offsets.size(); ++i) {
                    if (i != 0)
                        out += ", ";
                    out += std::to_string(n.offsets[i]);
                }
                return out + ")";
            } else if constexpr (std::is_same_v<T, SectionRef>) {
                std::string out = n.array + "(";
                for (std::size_t i = 0; i < n.subscripts.size(); ++i) {
                    if (i != 0)
                        out += ", ";
                    out += n.subscripts[i].index ? src(**n.subscripts[i].index) : ":";
                }
                out += ")";
                if (!n.cosubscripts.empty())
                    out += "[" + src_list(n.cosubscripts) + "]";
                return out;
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                static constexpr const char* ops[] = {" + ", " - ", " * ", " / "};
                int p = (n.op == BinaryOp::Add || n.op == BinaryOp::Sub) ? 2 : 3;
                return wrap(*n.lhs, p) + ops[static_cast<int>(n.op)] + wrap(*n.rhs, p + 1);
            } else if constexpr (std::is_same_v<T, CompareExpr>) {
                static constexpr const char* ops[] = {" /= ", " == ", " < ", " > "};
                return wrap(*n.lhs, 2) + ops[static_cast<int>(n.op)] + wrap(*n.rhs, 2);
            } else if constexpr (std::is_same_v<T, NegExpr>) {
                return "-" + wrap(*n.operand, 3);
            } else {
                return std::string(intrinsic_name(n.fn)) + "(" + src_list(n.args) + ")";
            }
        },
        e.node);
}

} // namespace

std::string dump_ast(const Program& program)
{
    Writer w;
    w.program(program);
    return w.out;
}

std::string dump_expr(const Expr& expr)
{
    return term(expr);
}

AstReadResult read_ast_dump(std::string_view text)
{
    AstReadResult out;
    try {
        Term t = TermParser(text).parse_all();
        out.program = program_of(t);
    } catch (const TermError& e) {
        out.error = e.message;
    }
    return out;
}

std::string to_source(const Expr& expr)
{
    return src(expr);
}

} // namespace lope::frontend
