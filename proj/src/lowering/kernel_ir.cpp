#include "lope/lowering/kernel_ir.hpp"

#include "lope/frontend/ast_dump.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace lope::lowering {

using namespace frontend;

int KernelIR::array_slot(const std::string& name) const
{
    for (std::size_t i = 0; i < array_params.size(); ++i) {
        if (array_params[i].name == name)
            return static_cast<int>(i);
    }
    return -1;
}

namespace {

ValueType value_type(BaseType b)
{
    return b == BaseType::Integer ? ValueType::Int : ValueType::Real;
}

ValueType combine(ValueType a, ValueType b)
{
    return a == ValueType::Int && b == ValueType::Int ? ValueType::Int : ValueType::Real;
}

class Lowerer {
  public:
    Lowerer(const KernelDef& kernel, const sema::SymbolTable& symbols) : kernel_(kernel), symbols_(symbols) {}

    KernelIR run()
    {
        ir_.name = kernel_.name;
        ir_.params = kernel_.params;
        const sema::Scope* scope = symbols_.kernel_scope(kernel_.name);
        if (scope == nullptr)
            return std::move(ir_);
        auto check = sema::check_kernel(kernel_, symbols_);
        for (const auto& p : kernel_.params) {
            const sema::ArrayEntity* e = scope->find(p);
            if (e == nullptr)
                continue;
            if (e->is_scalar()) {
                ir_.scalar_params.push_back({p, value_type(e->elem_type)});
            } else {
                ir_.array_params.push_back(
                    {p, e->rank, value_type(e->elem_type), e->elem_type == BaseType::Logical});
                auto fp = check.footprints.find(p);
                ir_.footprints.push_back(fp != check.footprints.end() ? fp->second
                                                                      : Footprint(static_cast<std::size_t>(e->rank)));
            }
        }
        for (const auto& e : scope->entities()) {
            if (!e.is_param && e.is_scalar())
                ir_.locals.push_back({e.name, value_type(e.elem_type)});
        }
        for (const auto& s : kernel_.body) {
            if (const auto* a = std::get_if<AssignStmt>(&s.node))
                assign(*a);
        }
        return std::move(ir_);
    }

  private:
    int local_slot(const std::string& name) const
    {
        for (std::size_t i = 0; i < ir_.locals.size(); ++i) {
            if (ir_.locals[i].name == name)
                return static_cast<int>(i);
        }
        return -1;
    }

    int param_slot(const std::string& name) const
    {
        for (std::size_t i = 0; i < ir_.scalar_params.size(); ++i) {
            if (ir_.scalar_params[i].name == name)
                return static_cast<int>(i);
        }
        return -1;
    }

    void assign(const AssignStmt& a)
    {
        IRAssign out;
        out.expr = lower(a.rhs);
        if (const auto* ref = std::get_if<OffsetRef>(&a.lhs.node)) {
            out.target = IRAssign::Target::Array;
            out.name = ref->array;
            out.slot = ir_.array_slot(ref->array);
            stored_.insert(ref->array);
        } else {
            const auto& id = std::get<Ident>(a.lhs.node);
            out.target = IRAssign::Target::Local;
            out.name = id.name;
            out.slot = local_slot(id.name);
        }
        ir_.body.push_back(std::move(out));
    }

    IRExpr lower(const Expr& e)
    {
        return std::visit(
            [&](const auto& n) -> IRExpr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, RealLit>) {
                    return {ConstNode{0, n.value}, ValueType::Real};
                } else if constexpr (std::is_same_v<T, IntLit>) {
                    return {ConstNode{n.value, 0.0}, ValueType::Int};
                } else if constexpr (std::is_same_v<T, Ident>) {
                    int slot = local_slot(n.name);
                    if (slot >= 0)
                        return {ScalarRead{ScalarKind::Local, n.name, slot}, ir_.locals[slot].type};
                    slot = param_slot(n.name);
                    return {ScalarRead{ScalarKind::Param, n.name, slot},
                            slot >= 0 ? ir_.scalar_params[slot].type : ValueType::Real};
                } else if constexpr (std::is_same_v<T, OffsetRef>) {
                    OffsetRead r;
                    r.array = n.array;
                    r.array_slot = ir_.array_slot(n.array);
                    r.offsets = n.offsets;
                    r.read_slot = static_cast<int>(ir_.reads.size());
                    bool local = std::all_of(n.offsets.begin(), n.offsets.end(), [](auto o) { return o == 0; });
                    r.from_output = local && stored_.count(n.array) != 0;
                    ir_.reads.push_back(r);
                    ValueType t = r.array_slot >= 0 ? ir_.array_params[r.array_slot].elem : ValueType::Real;
                    return {std::move(r), t};
                } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                    IRExpr l = lower(*n.lhs);
                    IRExpr r = lower(*n.rhs);
                    ValueType t = combine(l.type, r.type);
                    switch (n.op) {
                    case BinaryOp::Add: return {BinNode{IROp::Add, std::move(l), std::move(r)}, t};
                    case BinaryOp::Sub: {
                        ValueType rt = r.type;
                        IRExpr neg{NegNode{std::move(r)}, rt};
                        return {BinNode{IROp::Add, std::move(l), std::move(neg)}, t};
                    }
                    case BinaryOp::Mul: return {BinNode{IROp::Mul, std::move(l), std::move(r)}, t};
                    case BinaryOp::Div: return {BinNode{IROp::Div, std::move(l), std::move(r)}, t};
                    }
                    return {ConstNode{}, ValueType::Real};
                } else if constexpr (std::is_same_v<T, NegExpr>) {
                    IRExpr inner = lower(*n.operand);
                    ValueType t = inner.type;
                    return {NegNode{std::move(inner)}, t};
                } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
                    IntrinsicNode call{n.fn, {}};
                    ValueType t = ValueType::Int;
                    for (const auto& a : n.args) {
                        call.args.push_back(lower(a));
                        t = combine(t, call.args.back().type);
                    }
                    if (n.fn == IntrinsicFn::Sqrt)
                        t = ValueType::Real;
                    return {std::move(call), t};
                } else {
                    // Comparisons and sections are rejected by sema.
                    return {ConstNode{}, ValueType::Real};
                }
            },
            e.node);
    }

    const KernelDef& kernel_;
    const sema::SymbolTable& symbols_;
    std::set<std::string> stored_;
    KernelIR ir_;
};

std::string offsets_text(const std::vector<std::int64_t>& offsets)
{
    std::string s = "(";
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (i != 0)
            s += ',';
        s += std::to_string(offsets[i]);
    }
    return s + ")";
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}

std::int64_t wrap_mul(std::int64_t a, std::int64_t b)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

std::int64_t wrap_neg(std::int64_t a)
{
    return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(a));
}

std::int64_t to_int(double v)
{
    double t = std::trunc(v);
    if (!(t >= -9.2233720368547758e18 && t < 9.2233720368547758e18))
        throw EvalError("real value out of integer range");
    return static_cast<std::int64_t>(t);
}

} // namespace

KernelIR lower_kernel(const KernelDef& kernel, const sema::SymbolTable& symbols)
{
    return Lowerer(kernel, symbols).run();
}

std::string dump_ir_expr(const IRExpr& e)
{
    return std::visit(
        [&e](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ConstNode>) {
                if (e.type == ValueType::Int)
                    return std::to_string(n.int_value);
                std::string s = format_real(n.real_value);
                return s.find_first_of(".e") == std::string::npos ? s + ".0" : s;
            } else if constexpr (std::is_same_v<T, ScalarRead>) {
                return n.name;
            } else if constexpr (std::is_same_v<T, OffsetRead>) {
                return std::string(n.from_output ? "ReadOut(" : "Read(") + n.array + "," + offsets_text(n.offsets) +
                       ")";
            } else if constexpr (std::is_same_v<T, BinNode>) {
                static constexpr const char* names[] = {"Add", "Mul", "Div"};
                return std::string(names[static_cast<int>(n.op)]) + "(" + dump_ir_expr(*n.lhs) + ", " +
                       dump_ir_expr(*n.rhs) + ")";
            } else if constexpr (std::is_same_v<T, NegNode>) {
                return "Neg(" + dump_ir_expr(*n.operand) + ")";
            } else {
                std::string s = std::string(intrinsic_name(n.fn)) + "(";
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i != 0)
                        s += ", ";
                    s += dump_ir_expr(n.args[i]);
                }
                return s + ")";
            }
        },
        e.node);
}

std::string dump_ir(const KernelIR& ir)
{
    std::string out = "Kernel " + ir.name + "\n";
    for (std::size_t i = 0; i < ir.array_params.size(); ++i) {
        out += "  Array " + ir.array_params[i].name + " rank " + std::to_string(ir.array_params[i].rank) +
               " footprint [";
        const auto& fp = ir.footprints[i];
        for (std::size_t d = 0; d < fp.size(); ++d) {
            if (d != 0)
                out += ",";
            out += "(" + std::to_string(fp[d].max_neg) + "," + std::to_string(fp[d].max_pos) + ")";
        }
        out += "]\n";
    }
    for (const auto& s : ir.scalar_params)
        out += "  Scalar " + s.name + (s.type == ValueType::Int ? " int" : " real") + "\n";
    for (const auto& s : ir.locals)
        out += "  Local " + s.name + (s.type == ValueType::Int ? " int" : " real") + "\n";
    for (const auto& a : ir.body)
        out += "  IRAssign(" + a.name + ", " + dump_ir_expr(a.expr) + ")\n";
    return out;
}

double store_value(ValueType elem, const Value& v)
{
    if (elem == ValueType::Int)
        return static_cast<double>(v.type == ValueType::Int ? v.i : to_int(v.r));
    return v.as_real();
}

Value eval_expr(const IRExpr& e, const std::vector<Value>& locals, const std::vector<Value>& scalar_args,
                PointAccess& access)
{
    return std::visit(
        [&](const auto& n) -> Value {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ConstNode>) {
                return e.type == ValueType::Int ? Value::of_int(n.int_value) : Value::of_real(n.real_value);
            } else if constexpr (std::is_same_v<T, ScalarRead>) {
                const auto& src = n.kind == ScalarKind::Local ? locals : scalar_args;
                if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= src.size())
                    throw EvalError("unbound scalar '" + n.name + "'");
                return src[static_cast<std::size_t>(n.slot)];
            } else if constexpr (std::is_same_v<T, OffsetRead>) {
                double v = access.read(n);
                return e.type == ValueType::Int ? Value::of_int(to_int(v)) : Value::of_real(v);
            } else if constexpr (std::is_same_v<T, BinNode>) {
                Value a = eval_expr(*n.lhs, locals, scalar_args, access);
                Value b = eval_expr(*n.rhs, locals, scalar_args, access);
                if (e.type == ValueType::Int) {
                    switch (n.op) {
                    case IROp::Add: return Value::of_int(wrap_add(a.i, b.i));
                    case IROp::Mul: return Value::of_int(wrap_mul(a.i, b.i));
                    case IROp::Div:
                        if (b.i == 0)
                            throw EvalError("integer division by zero");
                        if (b.i == -1)
                            return Value::of_int(wrap_neg(a.i));
                        return Value::of_int(a.i / b.i);
                    }
                }
                double x = a.as_real();
                double y = b.as_real();
                switch (n.op) {
                case IROp::Add: return Value::of_real(x + y);
                case IROp::Mul: return Value::of_real(x * y);
                case IROp::Div: return Value::of_real(x / y);
                }
                return Value{};
            } else if constexpr (std::is_same_v<T, NegNode>) {
                Value a = eval_expr(*n.operand, locals, scalar_args, access);
                return a.type == ValueType::Int ? Value::of_int(wrap_neg(a.i)) : Value::of_real(-a.r);
            } else {
                std::vector<Value> args;
                args.reserve(n.args.size());
                for (const auto& a : n.args)
                    args.push_back(eval_expr(a, locals, scalar_args, access));
                switch (n.fn) {
                case IntrinsicFn::Abs:
                    if (e.type == ValueType::Int)
                        return Value::of_int(args[0].i < 0 ? wrap_neg(args[0].i) : args[0].i);
                    return Value::of_real(std::fabs(args[0].as_real()));
                case IntrinsicFn::Sqrt: return Value::of_real(std::sqrt(args[0].as_real()));
                case IntrinsicFn::Min:
                case IntrinsicFn::Max: {
                    bool is_min = n.fn == IntrinsicFn::Min;
                    if (e.type == ValueType::Int) {
                        std::int64_t acc = args[0].i;
                        for (std::size_t i = 1; i < args.size(); ++i)
                            acc = is_min ? std::min(acc, args[i].i) : std::max(acc, args[i].i);
                        return Value::of_int(acc);
                    }
                    double acc = args[0].as_real();
                    for (std::size_t i = 1; i < args.size(); ++i)
                        acc = is_min ? std::fmin(acc, args[i].as_real()) : std::fmax(acc, args[i].as_real());
                    return Value::of_real(acc);
                }
                case IntrinsicFn::ThisImage: break;
                }
                throw EvalError("intrinsic not available in kernels");
            }
        },
        e.node);
}

void run_point(const KernelIR& ir, const std::vector<Value>& scalar_args, PointAccess& access)
{
    std::vector<Value> locals;
    locals.reserve(ir.locals.size());
    for (const auto& l : ir.locals)
        locals.push_back(l.type == ValueType::Int ? Value::of_int(0) : Value::of_real(0.0));
    for (const auto& a : ir.body) {
        Value v = eval_expr(a.expr, locals, scalar_args, access);
        if (a.target == IRAssign::Target::Array) {
            access.write(a.slot, store_value(ir.array_params[static_cast<std::size_t>(a.slot)].elem, v));
        } else {
            auto& dst = locals[static_cast<std::size_t>(a.slot)];
            dst = dst.type == ValueType::Int ? Value::of_int(v.type == ValueType::Int ? v.i : to_int(v.r))
                                             : Value::of_real(v.as_real());
        }
    }
}

} // namespace lope::lowering
