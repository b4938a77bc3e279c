#include "lope/sema/checks.hpp"

#include <algorithm>
#include <set>

namespace lope::sema {

using namespace frontend;

namespace {

std::string quoted(const std::string& s)
{
    return "'" + s + "'";
}

// ===========================================================================
// Kernel checks

class KernelChecker {
  public:
    KernelChecker(const KernelDef& kernel, const SymbolTable& symbols)
        : kernel_(kernel), main_(symbols.main), scope_(symbols.kernel_scope(kernel.name))
    {
    }

    KernelCheck run()
    {
        if (scope_ == nullptr)
            return {};
        for (const auto& e : scope_->entities()) {
            if (e.is_param && !e.is_scalar()) {
                out_.footprints.emplace(e.name, Footprint(static_cast<std::size_t>(e.rank)));
                if (!e.halo) {
                    out_.diagnostics.error(ErrorCode::MissingHalo, e.pos,
                                           "array parameter " + quoted(e.name) + " needs a HALO attribute");
                }
            } else if (!e.is_param && !e.is_scalar()) {
                out_.diagnostics.error(ErrorCode::ImpureKernel, e.pos,
                                       "local array " + quoted(e.name) + " is not allowed in a concurrent kernel");
            }
        }
        for (const auto& s : kernel_.body) {
            if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
                assign(*a);
            } else if (const auto* c = std::get_if<CallKernelStmt>(&s.node)) {
                out_.diagnostics.error(ErrorCode::ImpureKernel, s.pos,
                                       "call to " + quoted(c->kernel) + " inside a concurrent kernel");
            }
        }
        return std::move(out_);
    }

  private:
    // Resolves a kernel-body name; reports and returns nullptr if it is not a
    // parameter or local.
    const ArrayEntity* resolve(const std::string& name, const SourcePos& pos)
    {
        if (const auto* e = scope_->find(name))
            return e;
        if (main_.find(name) != nullptr) {
            out_.diagnostics.error(ErrorCode::ImpureKernel, pos,
                                   quoted(name) + " is not a parameter or local of kernel " + quoted(kernel_.name));
        } else {
            out_.diagnostics.error(ErrorCode::Undeclared, pos, quoted(name) + " is not declared");
        }
        return nullptr;
    }

    bool arity_ok(const ArrayEntity& e, const OffsetRef& ref, const SourcePos& pos)
    {
        if (e.is_scalar()) {
            out_.diagnostics.error(ErrorCode::ShapeMismatch, pos, quoted(e.name) + " is a scalar, not an array");
            return false;
        }
        if (static_cast<int>(ref.offsets.size()) != e.rank) {
            out_.diagnostics.error(ErrorCode::ShapeMismatch, pos,
                                   quoted(e.name) + " has rank " + std::to_string(e.rank) + " but " +
                                       std::to_string(ref.offsets.size()) + " offset(s) are given");
            return false;
        }
        return true;
    }

    void assign(const AssignStmt& a)
    {
        read(a.rhs);
        if (const auto* id = std::get_if<Ident>(&a.lhs.node)) {
            const ArrayEntity* e = resolve(id->name, a.lhs.pos);
            if (e == nullptr)
                return;
            if (!e->is_scalar()) {
                out_.diagnostics.error(ErrorCode::ShapeMismatch, a.lhs.pos,
                                       "array " + quoted(e->name) + " must be assigned through its local element");
            } else if (e->is_param) {
                out_.diagnostics.error(ErrorCode::ImpureKernel, a.lhs.pos,
                                       "scalar parameter " + quoted(e->name) + " cannot be assigned");
            }
            return;
        }
        const auto& ref = std::get<OffsetRef>(a.lhs.node);
        const ArrayEntity* e = resolve(ref.array, a.lhs.pos);
        if (e == nullptr || !arity_ok(*e, ref, a.lhs.pos))
            return;
        bool local = std::all_of(ref.offsets.begin(), ref.offsets.end(), [](auto o) { return o == 0; });
        if (!local) {
            out_.diagnostics.error(ErrorCode::HaloWrite, a.lhs.pos,
                                   "store to " + quoted(ref.array) +
                                       " at a nonzero offset; only the local element may be modified");
            return;
        }
        stored_.insert(ref.array);
    }

    void read(const Expr& e)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Ident>) {
                    const ArrayEntity* ent = resolve(n.name, e.pos);
                    if (ent != nullptr && !ent->is_scalar()) {
                        out_.diagnostics.error(ErrorCode::ShapeMismatch, e.pos,
                                               "array " + quoted(n.name) + " must be referenced with offsets");
                    }
                } else if constexpr (std::is_same_v<T, OffsetRef>) {
                    offset_read(n, e.pos);
                } else if constexpr (std::is_same_v<T, SectionRef>) {
                    out_.diagnostics.error(ErrorCode::ImpureKernel, e.pos,
                                           "section reference inside a concurrent kernel");
                } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                    read(*n.lhs);
                    read(*n.rhs);
                } else if constexpr (std::is_same_v<T, CompareExpr>) {
                    out_.diagnostics.error(ErrorCode::ImpureKernel, e.pos,
                                           "comparisons are not allowed in a concurrent kernel");
                    read(*n.lhs);
                    read(*n.rhs);
                } else if constexpr (std::is_same_v<T, NegExpr>) {
                    read(*n.operand);
                } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
                    intrinsic(n, e.pos);
                }
            },
            e.node);
    }

    void intrinsic(const IntrinsicCall& call, const SourcePos& pos)
    {
        std::string fname(intrinsic_name(call.fn));
        if (call.fn == IntrinsicFn::ThisImage) {
            out_.diagnostics.error(ErrorCode::ImpureKernel, pos,
                                   "intrinsic " + quoted(fname) + " is not allowed in a concurrent kernel");
        } else {
            bool unary = call.fn == IntrinsicFn::Abs || call.fn == IntrinsicFn::Sqrt;
            bool ok = unary ? call.args.size() == 1 : call.args.size() >= 2;
            if (!ok) {
                out_.diagnostics.error(ErrorCode::ImpureKernel, pos,
                                       "wrong number of arguments to intrinsic " + quoted(fname));
            }
        }
        for (const auto& a : call.args)
            read(a);
    }

    void offset_read(const OffsetRef& ref, const SourcePos& pos)
    {
        const ArrayEntity* e = resolve(ref.array, pos);
        if (e == nullptr || !arity_ok(*e, ref, pos))
            return;
        bool local = std::all_of(ref.offsets.begin(), ref.offsets.end(), [](auto o) { return o == 0; });
        if (!local && stored_.count(ref.array) != 0) {
            out_.diagnostics.error(ErrorCode::StoreThenHaloRead, pos,
                                   "read of " + quoted(ref.array) +
                                       " at a nonzero offset after its local element was stored");
        }
        auto fp = out_.footprints.find(ref.array);
        if (fp == out_.footprints.end())
            return;
        for (std::size_t d = 0; d < ref.offsets.size(); ++d) {
            std::int64_t o = ref.offsets[d];
            auto& dim = fp->second[d];
            if (o < 0)
                dim.max_neg = static_cast<int>(std::max<std::int64_t>(dim.max_neg, -o));
            else
                dim.max_pos = static_cast<int>(std::max<std::int64_t>(dim.max_pos, o));
            if (e->halo && d < e->halo->dims.size() && e->halo->dims[d]) {
                const HaloExtent& h = *e->halo->dims[d];
                if (-o > h.lo || o > h.hi) {
                    out_.diagnostics.error(ErrorCode::HaloBoundsExceeded, pos,
                                           "offset " + std::to_string(o) + " in dimension " +
                                               std::to_string(d + 1) + " of " + quoted(ref.array) +
                                               " lies outside its halo " + std::to_string(h.lo) + ":*:" +
                                               std::to_string(h.hi));
                }
            }
        }
    }

    const KernelDef& kernel_;
    const Scope& main_;
    const Scope* scope_;
    std::set<std::string> stored_;
    KernelCheck out_;
};

// ===========================================================================
// Host checks

class HostChecker {
  public:
    HostChecker(const Program& program, const SymbolTable& symbols,
                const std::map<std::string, std::map<std::string, Footprint>>& footprints)
        : program_(program), symbols_(symbols), main_(symbols.main), footprints_(footprints)
    {
        collect_subimage_vars(program.main.body);
    }

    DiagnosticList run()
    {
        stmts(program_.main.body);
        return std::move(diags_);
    }

  private:
    void collect_subimage_vars(const std::vector<Stmt>& body)
    {
        for (const auto& s : body) {
            if (const auto* a = std::get_if<AssignSubimageStmt>(&s.node))
                subimage_vars_.insert(a->var);
            else if (const auto* d = std::get_if<DoCountedStmt>(&s.node))
                collect_subimage_vars(d->body);
            else if (const auto* i = std::get_if<IfStmt>(&s.node))
                collect_subimage_vars(i->body);
        }
    }

    bool bad_corank(const ArrayEntity& e) const { return e.corank > 0 && e.corank != e.rank; }

    void require_subimage(const std::string& var, const SourcePos& pos)
    {
        if (main_.find(var) == nullptr)
            return; // already reported as undeclared
        if (subimage_vars_.count(var) == 0) {
            diags_.error(ErrorCode::DeviceVarNotSubimage, pos,
                         quoted(var) + " is used as a subimage but is never assigned from GET_SUBIMAGE");
        }
    }

    void stmts(const std::vector<Stmt>& body)
    {
        for (const auto& s : body)
            std::visit([&](const auto& n) { stmt(n, s.pos); }, s.node);
    }

    void stmt(const AssignStmt& s, const SourcePos&)
    {
        if (const auto* ref = std::get_if<SectionRef>(&s.lhs.node)) {
            section(*ref, s.lhs.pos);
        } else if (const auto* id = std::get_if<Ident>(&s.lhs.node)) {
            const ArrayEntity* e = main_.find(id->name);
            if (e != nullptr && !e->is_scalar() && std::holds_alternative<SectionRef>(s.rhs.node)) {
                diags_.error(ErrorCode::ShapeMismatch, s.rhs.pos,
                             "whole-array assignment from a section is not supported");
            }
        }
        expr(s.rhs);
    }

    void section(const SectionRef& ref, const SourcePos& pos)
    {
        const ArrayEntity* e = main_.find(ref.array);
        if (e == nullptr)
            return;
        if (static_cast<int>(ref.subscripts.size()) != e->rank) {
            diags_.error(ErrorCode::ShapeMismatch, pos,
                         quoted(ref.array) + " has rank " + std::to_string(e->rank) + " but " +
                             std::to_string(ref.subscripts.size()) + " subscript(s) are given");
        }
        if (!ref.cosubscripts.empty() && static_cast<int>(ref.cosubscripts.size()) != e->corank) {
            diags_.error(ErrorCode::ShapeMismatch, pos,
                         quoted(ref.array) + " has corank " + std::to_string(e->corank) + " but " +
                             std::to_string(ref.cosubscripts.size()) + " cosubscript(s) are given");
        }
    }

    void expr(const Expr& e)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, SectionRef>) {
                    section(n, e.pos);
                    for (const auto& s : n.subscripts) {
                        if (s.index)
                            expr(**s.index);
                    }
                    for (const auto& c : n.cosubscripts)
                        expr(c);
                } else if constexpr (std::is_same_v<T, BinaryExpr> || std::is_same_v<T, CompareExpr>) {
                    expr(*n.lhs);
                    expr(*n.rhs);
                } else if constexpr (std::is_same_v<T, NegExpr>) {
                    expr(*n.operand);
                } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
                    for (const auto& a : n.args)
                        expr(a);
                }
            },
            e.node);
    }

    void stmt(const AllocateStmt& s, const SourcePos& pos)
    {
        const ArrayEntity* e = main_.find(s.array);
        if (e == nullptr)
            return;
        if (!e->allocatable) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos, quoted(s.array) + " is not allocatable");
            return;
        }
        if (s.exec_target) {
            device_allocate(s, *e, pos);
            return;
        }
        if (s.halo_src) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "HALO_SRC= is only valid when allocating on a subimage");
        }
        if (static_cast<int>(s.bounds.size()) != e->rank) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "allocation of " + quoted(s.array) + " gives " + std::to_string(s.bounds.size()) +
                             " bound(s) for an array of rank " + std::to_string(e->rank));
        }
        if (static_cast<int>(s.cobounds.size()) != e->corank) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "allocation of " + quoted(s.array) + " gives " + std::to_string(s.cobounds.size()) +
                             " cobound(s) for corank " + std::to_string(e->corank));
        } else if (!s.cobounds.empty()) {
            for (std::size_t i = 0; i + 1 < s.cobounds.size(); ++i) {
                if (!s.cobounds[i].extent)
                    diags_.error(ErrorCode::AllocShapeMismatch, pos, "only the last cobound may be '*'");
            }
            if (s.cobounds.back().extent)
                diags_.error(ErrorCode::AllocShapeMismatch, pos, "the last cobound must be '*'");
        }
        for (const auto& b : s.bounds) {
            if (b.lo)
                expr(*b.lo);
            expr(b.hi);
        }
    }

    void device_allocate(const AllocateStmt& s, const ArrayEntity& e, const SourcePos& pos)
    {
        const std::string& dev = *s.exec_target;
        require_subimage(dev, pos);
        if (!s.bounds.empty()) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "a subimage allocation takes its shape from HALO_SRC=, not explicit bounds");
        }
        const Ident* co = s.cobounds.size() == 1 && s.cobounds[0].extent
                              ? std::get_if<Ident>(&s.cobounds[0].extent->node)
                              : nullptr;
        if (co == nullptr || co->name != dev) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "subimage allocation must be written " + s.array + "[" + dev + "]");
        }
        if (!s.halo_src || *s.halo_src != s.array) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         "subimage allocation of " + quoted(s.array) + " requires HALO_SRC=" + s.array);
        }
        if (e.is_scalar())
            diags_.error(ErrorCode::AllocShapeMismatch, pos, "cannot mirror scalar " + quoted(s.array));
    }

    void stmt(const DeallocateStmt& s, const SourcePos& pos)
    {
        const ArrayEntity* e = main_.find(s.array);
        if (e != nullptr && !e->allocatable)
            diags_.error(ErrorCode::AllocShapeMismatch, pos, quoted(s.array) + " is not allocatable");
    }

    void stmt(const DoCountedStmt& s, const SourcePos&)
    {
        expr(s.lo);
        expr(s.hi);
        stmts(s.body);
    }

    void stmt(const DoConcurrentStmt& s, const SourcePos& pos)
    {
        for (const auto& r : s.ranges) {
            expr(r.lo);
            expr(r.hi);
        }
        if (s.exec_target)
            require_subimage(*s.exec_target, pos);

        const KernelDef* k = program_.find_kernel(s.call.kernel);
        const Scope* ks = symbols_.kernel_scope(s.call.kernel);
        if (k == nullptr || ks == nullptr)
            return;
        if (s.call.args.size() != k->params.size()) {
            diags_.error(ErrorCode::ShapeMismatch, s.call_pos,
                         quoted(k->name) + " takes " + std::to_string(k->params.size()) + " argument(s) but " +
                             std::to_string(s.call.args.size()) + " are given");
            return;
        }
        for (std::size_t i = 0; i < k->params.size(); ++i) {
            const ArrayEntity* formal = ks->find(k->params[i]);
            if (formal != nullptr)
                launch_arg(s, *k, *formal, s.call.args[i]);
        }
    }

    void launch_arg(const DoConcurrentStmt& s, const KernelDef& k, const ArrayEntity& formal, const Expr& arg)
    {
        const auto* ref = std::get_if<SectionRef>(&arg.node);
        if (formal.is_scalar()) {
            const Ident* id = std::get_if<Ident>(&arg.node);
            const ArrayEntity* actual = id != nullptr ? main_.find(id->name) : nullptr;
            if (ref != nullptr || (actual != nullptr && !actual->is_scalar())) {
                diags_.error(ErrorCode::ShapeMismatch, arg.pos,
                             "scalar parameter " + quoted(formal.name) + " of " + quoted(k.name) +
                                 " needs a scalar argument");
            }
            expr(arg);
            return;
        }
        if (ref == nullptr) {
            diags_.error(ErrorCode::ShapeMismatch, arg.pos,
                         "array parameter " + quoted(formal.name) + " of " + quoted(k.name) +
                             " must be passed as the local element, e.g. A(i,j)");
            return;
        }
        const ArrayEntity* actual = main_.find(ref->array);
        if (actual == nullptr)
            return;
        if (actual->rank != formal.rank || static_cast<int>(s.ranges.size()) != actual->rank) {
            diags_.error(ErrorCode::ShapeMismatch, arg.pos,
                         quoted(ref->array) + " has rank " + std::to_string(actual->rank) + " but " +
                             quoted(k.name) + " expects rank " + std::to_string(formal.rank) + " over " +
                             std::to_string(s.ranges.size()) + " loop index(es)");
            return;
        }
        if (actual->elem_type != formal.elem_type) {
            diags_.error(ErrorCode::ShapeMismatch, arg.pos,
                         "element type of " + quoted(ref->array) + " does not match parameter " +
                             quoted(formal.name));
        }
        if (actual->corank != actual->rank) {
            if (!bad_corank(*actual)) {
                diags_.error(ErrorCode::RankCorankMismatch, arg.pos,
                             quoted(ref->array) + " must be a coarray with corank equal to its rank");
            }
        }
        if (!actual->halo || !actual->halo->fully_explicit()) {
            diags_.error(ErrorCode::MissingHalo, arg.pos, quoted(ref->array) + " has no explicit HALO");
        } else {
            auto kf = footprints_.find(k.name);
            if (kf != footprints_.end()) {
                auto fp = kf->second.find(formal.name);
                if (fp != kf->second.end())
                    diags_.append(check_footprint(fp->second, *actual->halo, arg.pos, ref->array));
            }
        }
        if (!ref->cosubscripts.empty()) {
            const auto& dev = std::get<Ident>(ref->cosubscripts[0].node).name;
            require_subimage(dev, arg.pos);
            if (!s.exec_target || *s.exec_target != dev) {
                diags_.error(ErrorCode::DeviceVarNotSubimage, arg.pos,
                             "argument memory " + quoted(dev) + " differs from the launch target");
            }
        }
    }

    void stmt(const HaloTransferStmt& s, const SourcePos& pos)
    {
        const ArrayEntity* e = main_.find(s.array);
        if (e == nullptr)
            return;
        if (!e->is_coarray()) {
            diags_.error(ErrorCode::MissingHalo, pos, "HALO_TRANSFER needs a coarray; " + quoted(s.array) + " is not");
            return;
        }
        if (e->is_scalar() || !e->halo || !e->halo->fully_explicit()) {
            diags_.error(ErrorCode::MissingHalo, pos, quoted(s.array) + " has no explicit HALO");
            return;
        }
        if (e->corank != e->rank && !bad_corank(*e)) {
            diags_.error(ErrorCode::RankCorankMismatch, pos,
                         quoted(s.array) + " must have corank equal to its rank");
        }
    }

    void stmt(const CallKernelStmt& s, const SourcePos& pos)
    {
        diags_.error(ErrorCode::ImpureKernel, pos,
                     "concurrent subroutine " + quoted(s.kernel) + " may only be called from do concurrent");
    }

    void stmt(const IfStmt& s, const SourcePos&)
    {
        expr(s.cond);
        stmts(s.body);
    }

    void stmt(const AssignSubimageStmt& s, const SourcePos& pos)
    {
        const ArrayEntity* e = main_.find(s.var);
        if (e != nullptr && (!e->is_scalar() || e->elem_type != BaseType::Integer)) {
            diags_.error(ErrorCode::ShapeMismatch, pos,
                         "GET_SUBIMAGE result needs an integer scalar; " + quoted(s.var) + " is not");
        }
    }

    void stmt(const MirrorAssignStmt& s, const SourcePos& pos)
    {
        require_subimage(s.device, pos);
        const ArrayEntity* e = main_.find(s.array);
        if (e != nullptr && (e->is_scalar() || !e->allocatable)) {
            diags_.error(ErrorCode::AllocShapeMismatch, pos,
                         quoted(s.array) + " is not an allocatable array and has no subimage copy");
        }
    }

    const Program& program_;
    const SymbolTable& symbols_;
    const Scope& main_;
    const std::map<std::string, std::map<std::string, Footprint>>& footprints_;
    std::set<std::string> subimage_vars_;
    DiagnosticList diags_;
};

} // namespace

KernelCheck check_kernel(const KernelDef& kernel, const SymbolTable& symbols)
{
    return KernelChecker(kernel, symbols).run();
}

DiagnosticList check_footprint(const Footprint& footprint, const HaloSpec& actual, const SourcePos& pos,
                               const std::string& array)
{
    DiagnosticList out;
    for (std::size_t d = 0; d < footprint.size(); ++d) {
        if (d >= actual.dims.size() || !actual.dims[d])
            continue;
        const HaloExtent& h = *actual.dims[d];
        const FootprintDim& f = footprint[d];
        if (f.max_neg > h.lo || f.max_pos > h.hi) {
            out.error(ErrorCode::HaloBoundsExceeded, pos,
                      "kernel reads " + std::to_string(f.max_neg) + ":*:" + std::to_string(f.max_pos) +
                          " in dimension " + std::to_string(d + 1) + " but " + quoted(array) + " has halo " +
                          std::to_string(h.lo) + ":*:" + std::to_string(h.hi));
        }
    }
    return out;
}

DiagnosticList check_host(const Program& program, const SymbolTable& symbols)
{
    std::map<std::string, std::map<std::string, Footprint>> footprints;
    for (const auto& k : program.kernels)
        footprints[k.name] = check_kernel(k, symbols).footprints;
    return HostChecker(program, symbols, footprints).run();
}

Analysis analyze(const Program& program)
{
    Analysis out;
    SymbolResult st = build_symbol_table(program);
    out.symbols = std::move(st.table);
    DiagnosticList all = std::move(st.diagnostics);
    std::set<std::string> checked;
    for (const auto& k : program.kernels) {
        if (!checked.insert(k.name).second)
            continue;
        KernelCheck kc = check_kernel(k, out.symbols);
        all.append(kc.diagnostics);
        out.footprints[k.name] = std::move(kc.footprints);
    }
    all.append(HostChecker(program, out.symbols, out.footprints).run());
    for (const auto& d : all.sorted()) {
        if (d.severity == Severity::Error)
            out.diagnostics.error(d.code, d.pos, d.message);
        else
            out.diagnostics.warning(d.code, d.pos, d.message);
    }
    return out;
}

} // namespace lope::sema
