#include "lope/sema/symbols.hpp"

#include <algorithm>
#include <set>

namespace lope::sema {

using namespace frontend;

bool Scope::insert(ArrayEntity entity)
{
    if (index_.count(entity.name) != 0)
        return false;
    index_.emplace(entity.name, entities_.size());
    entities_.push_back(std::move(entity));
    return true;
}

const ArrayEntity* Scope::find(const std::string& name) const
{
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entities_[it->second];
}

ArrayEntity* Scope::find(const std::string& name)
{
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entities_[it->second];
}

const Scope* SymbolTable::kernel_scope(const std::string& kernel) const
{
    auto it = kernels.find(kernel);
    return it == kernels.end() ? nullptr : &it->second;
}

int declared_rank(const TypeDecl& decl)
{
    if (decl.dimension)
        return static_cast<int>(decl.dimension->size());
    if (decl.halo)
        return decl.halo->rank();
    return 0;
}

namespace {

void declare(Scope& scope, const TypeDecl& decl, const std::set<std::string>& params, DiagnosticList& diags)
{
    int rank = declared_rank(decl);
    int corank = decl.codimension ? static_cast<int>(decl.codimension->size()) : 0;

    if (decl.dimension && decl.halo && decl.halo->rank() != rank) {
        diags.error(ErrorCode::ShapeMismatch, decl.pos,
                    "halo has " + std::to_string(decl.halo->rank()) + " dimension(s) but the array has rank " +
                        std::to_string(rank));
    }
    if (decl.halo) {
        for (std::size_t d = 0; d < decl.halo->dims.size(); ++d) {
            const auto& h = decl.halo->dims[d];
            if (h && (h->lo > kMaxHaloExtent || h->hi > kMaxHaloExtent)) {
                diags.error(ErrorCode::ShapeMismatch, decl.pos,
                            "halo extent in dimension " + std::to_string(d + 1) + " exceeds the limit of " +
                                std::to_string(kMaxHaloExtent));
            }
        }
    }
    if (rank > kMaxRank)
        diags.error(ErrorCode::ShapeMismatch, decl.pos, "arrays of rank above 3 are not supported");
    if (corank > 0 && corank != rank) {
        diags.error(ErrorCode::RankCorankMismatch, decl.pos,
                    "corank " + std::to_string(corank) + " must equal the rank " + std::to_string(rank));
    } else if (corank > kMaxCorank) {
        diags.error(ErrorCode::ShapeMismatch, decl.pos, "coarrays of corank above 2 are not supported");
    }

    for (std::size_t i = 0; i < decl.entities.size(); ++i) {
        ArrayEntity e;
        e.name = decl.entities[i];
        e.elem_type = decl.base;
        e.rank = rank;
        e.corank = corank;
        e.halo = decl.halo;
        e.allocatable = decl.allocatable;
        e.is_param = params.count(e.name) != 0;
        e.pos = i < decl.entity_pos.size() ? decl.entity_pos[i] : decl.pos;
        SourcePos pos = e.pos;
        if (!scope.insert(std::move(e)))
            diags.error(ErrorCode::DuplicateDecl, pos, "'" + decl.entities[i] + "' is already declared");
    }
}

// Walks main-program statements reporting names that resolve to nothing.
class UseChecker {
  public:
    UseChecker(const Program& program, const Scope& scope, DiagnosticList& diags)
        : program_(program), scope_(scope), diags_(diags)
    {
    }

    void stmts(const std::vector<Stmt>& body)
    {
        for (const auto& s : body)
            std::visit([&](const auto& n) { stmt(n, s.pos); }, s.node);
    }

  private:
    void name(const std::string& n, const SourcePos& pos)
    {
        if (std::find(indices_.begin(), indices_.end(), n) != indices_.end())
            return;
        if (scope_.find(n) == nullptr && reported_.insert(n).second)
            diags_.error(ErrorCode::Undeclared, pos, "'" + n + "' is not declared");
    }

    void kernel(const std::string& k, const SourcePos& pos)
    {
        if (program_.find_kernel(k) == nullptr)
            diags_.error(ErrorCode::Undeclared, pos, "no concurrent subroutine named '" + k + "'");
    }

    void expr(const Expr& e)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Ident>) {
                    name(n.name, e.pos);
                } else if constexpr (std::is_same_v<T, OffsetRef>) {
                    name(n.array, e.pos);
                } else if constexpr (std::is_same_v<T, SectionRef>) {
                    name(n.array, e.pos);
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

    void stmt(const AssignStmt& s, const SourcePos&)
    {
        expr(s.lhs);
        expr(s.rhs);
    }

    void stmt(const AllocateStmt& s, const SourcePos& pos)
    {
        name(s.array, pos);
        for (const auto& b : s.bounds) {
            if (b.lo)
                expr(*b.lo);
            expr(b.hi);
        }
        for (const auto& c : s.cobounds) {
            if (c.extent)
                expr(*c.extent);
        }
        if (s.halo_src)
            name(*s.halo_src, pos);
        if (s.exec_target)
            name(*s.exec_target, pos);
    }

    void stmt(const DeallocateStmt& s, const SourcePos& pos) { name(s.array, pos); }

    void stmt(const DoCountedStmt& s, const SourcePos& pos)
    {
        name(s.var, pos);
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
            name(*s.exec_target, pos);
        kernel(s.call.kernel, s.call_pos);
        std::size_t saved = indices_.size();
        for (const auto& r : s.ranges)
            indices_.push_back(r.var);
        for (const auto& a : s.call.args)
            expr(a);
        indices_.resize(saved);
    }

    void stmt(const HaloTransferStmt& s, const SourcePos& pos) { name(s.array, pos); }

    void stmt(const CallKernelStmt& s, const SourcePos& pos)
    {
        kernel(s.kernel, pos);
        for (const auto& a : s.args)
            expr(a);
    }

    void stmt(const IfStmt& s, const SourcePos&)
    {
        expr(s.cond);
        stmts(s.body);
    }

    void stmt(const AssignSubimageStmt& s, const SourcePos& pos) { name(s.var, pos); }

    void stmt(const MirrorAssignStmt& s, const SourcePos& pos)
    {
        name(s.array, pos);
        name(s.device, pos);
    }

    const Program& program_;
    const Scope& scope_;
    DiagnosticList& diags_;
    std::vector<std::string> indices_;
    std::set<std::string> reported_;
};

} // namespace

SymbolResult build_symbol_table(const Program& program)
{
    SymbolResult out;

    std::set<std::string> seen_kernels;
    for (const auto& k : program.kernels) {
        if (!seen_kernels.insert(k.name).second) {
            out.diagnostics.error(ErrorCode::DuplicateDecl, k.pos,
                                  "concurrent subroutine '" + k.name + "' is already defined");
            continue;
        }
        Scope scope;
        std::set<std::string> params;
        for (const auto& p : k.params) {
            if (!params.insert(p).second)
                out.diagnostics.error(ErrorCode::DuplicateDecl, k.pos, "parameter '" + p + "' appears twice");
        }
        for (const auto& d : k.decls)
            declare(scope, d, params, out.diagnostics);
        for (const auto& p : k.params) {
            if (scope.find(p) == nullptr)
                out.diagnostics.error(ErrorCode::Undeclared, k.pos, "parameter '" + p + "' has no declaration");
        }
        out.table.kernels.emplace(k.name, std::move(scope));
    }

    for (const auto& d : program.main.decls)
        declare(out.table.main, d, {}, out.diagnostics);
    UseChecker(program, out.table.main, out.diagnostics).stmts(program.main.body);
    return out;
}

} // namespace lope::sema
