#pragma once

#include "lope/diagnostic.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lope::frontend {

/// Heap-allocated value with deep copy and deep comparison, for recursive AST nodes.
template <typename T>
class Box {
  public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other)
    {
        if (this != &other)
            ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

    bool operator==(const Box& other) const { return *ptr_ == *other.ptr_; }

  private:
    std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------------------
// Halo specification: `HALO(M:*:N, ...)` or deferred `HALO(:, ...)`.

struct HaloExtent {
    int lo = 0;
    int hi = 0;
    bool operator==(const HaloExtent&) const = default;
};

/// One entry per dimension; std::nullopt marks a deferred (`:`) dimension.
struct HaloSpec {
    std::vector<std::optional<HaloExtent>> dims;

    bool fully_explicit() const;
    int rank() const { return static_cast<int>(dims.size()); }
    bool operator==(const HaloSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprBox = Box<Expr>;

enum class BinaryOp { Add, Sub, Mul, Div };
enum class CompareOp { Ne, Eq, Lt, Gt };
enum class IntrinsicFn { ThisImage, Abs, Min, Max, Sqrt };

struct RealLit {
    double value = 0.0;
    bool operator==(const RealLit&) const = default;
};

struct IntLit {
    std::int64_t value = 0;
    bool operator==(const IntLit&) const = default;
};

struct Ident {
    std::string name;
    bool operator==(const Ident&) const = default;
};

/// Kernel-local reference `U(-1,0)`: offsets relative to the local element.
struct OffsetRef {
    std::string array;
    std::vector<std::int64_t> offsets;
    bool operator==(const OffsetRef&) const = default;
};

/// Per-dimension subscript of a host section: an index expression or `:`.
struct Subscript {
    std::optional<ExprBox> index; // nullopt = full range
    bool operator==(const Subscript&) const = default;
};

/// Host array reference `U(1,:)` with optional cosubscripts `[pcol+1,prow]`.
struct SectionRef {
    std::string array;
    std::vector<Subscript> subscripts;
    std::vector<Expr> cosubscripts; // empty = local
    bool operator==(const SectionRef&) const = default;
};

struct BinaryExpr {
    BinaryOp op = BinaryOp::Add;
    ExprBox lhs;
    ExprBox rhs;
    bool operator==(const BinaryExpr&) const = default;
};

struct CompareExpr {
    CompareOp op = CompareOp::Eq;
    ExprBox lhs;
    ExprBox rhs;
    bool operator==(const CompareExpr&) const = default;
};

struct NegExpr {
    ExprBox operand;
    bool operator==(const NegExpr&) const = default;
};

struct IntrinsicCall {
    IntrinsicFn fn = IntrinsicFn::ThisImage;
    std::vector<Expr> args;
    bool operator==(const IntrinsicCall&) const = default;
};

using ExprNode = std::variant<RealLit, IntLit, Ident, OffsetRef, SectionRef, BinaryExpr, CompareExpr,
                              NegExpr, IntrinsicCall>;

struct Expr {
    ExprNode node;
    SourcePos pos;

    // Structural: positions are not compared.
    bool operator==(const Expr& other) const { return node == other.node; }
};

// ---------------------------------------------------------------------------
// Declarations

enum class BaseType { Real, Integer, Logical };

/// `dimension(...)` entry: `:` (deferred) or an explicit bound `[lo:]hi`.
struct DimSpec {
    std::optional<Expr> lo;
    std::optional<Expr> hi; // both nullopt = deferred
    bool operator==(const DimSpec&) const = default;
};

/// `codimension[...]` entry: `:`, `*`, or an expression.
struct CodimSpec {
    enum class Kind { Deferred, Star, Extent } kind = Kind::Deferred;
    std::optional<Expr> extent;
    bool operator==(const CodimSpec&) const = default;
};

struct TypeDecl {
    BaseType base = BaseType::Real;
    bool allocatable = false;
    bool pure = false;
    bool concurrent = false;
    std::optional<std::vector<DimSpec>> dimension;
    std::optional<std::vector<CodimSpec>> codimension;
    std::optional<HaloSpec> halo;
    std::vector<std::string> entities;
    std::vector<SourcePos> entity_pos; // parallel to entities
    SourcePos pos;

    bool operator==(const TypeDecl& o) const
    {
        return base == o.base && allocatable == o.allocatable && pure == o.pure &&
               concurrent == o.concurrent && dimension == o.dimension && codimension == o.codimension &&
               halo == o.halo && entities == o.entities;
    }
};

// ---------------------------------------------------------------------------
// Statements

struct Stmt;

struct AssignStmt {
    Expr lhs; // Ident, OffsetRef or SectionRef
    Expr rhs;
    bool operator==(const AssignStmt&) const = default;
};

/// Allocation bound `lo:hi` or just `hi`.
struct AllocBound {
    std::optional<Expr> lo;
    Expr hi;
    bool operator==(const AllocBound&) const = default;
};

/// Cobound: an expression or `*`.
struct Cobound {
    std::optional<Expr> extent; // nullopt = '*'
    bool operator==(const Cobound&) const = default;
};

struct AllocateStmt {
    std::string array;
    std::vector<AllocBound> bounds;
    std::vector<Cobound> cobounds;
    std::optional<std::string> halo_src;
    std::optional<std::string> exec_target;
    bool operator==(const AllocateStmt&) const = default;
};

struct DeallocateStmt {
    std::string array;
    bool operator==(const DeallocateStmt&) const = default;
};

struct DoCountedStmt {
    std::string var;
    Expr lo;
    Expr hi;
    std::vector<Stmt> body;
    bool operator==(const DoCountedStmt&) const;
};

struct IndexRange {
    std::string var;
    Expr lo;
    Expr hi;
    bool operator==(const IndexRange&) const = default;
};

struct CallKernelStmt {
    std::string kernel;
    std::vector<Expr> args;
    bool operator==(const CallKernelStmt&) const = default;
};

struct DoConcurrentStmt {
    std::vector<IndexRange> ranges;
    std::optional<std::string> exec_target; // `[[dev]]`; nullopt = executing image
    CallKernelStmt call;
    SourcePos call_pos;
    bool operator==(const DoConcurrentStmt& o) const
    {
        return ranges == o.ranges && exec_target == o.exec_target && call == o.call;
    }
};

enum class BoundaryKind { Cyclic };

struct HaloTransferStmt {
    std::string array;
    BoundaryKind bc = BoundaryKind::Cyclic;
    bool operator==(const HaloTransferStmt&) const = default;
};

struct IfStmt {
    Expr cond;
    std::vector<Stmt> body;
    bool operator==(const IfStmt&) const;
};

/// `var = get_subimage(k)`
struct AssignSubimageStmt {
    std::string var;
    std::int64_t device = 1;
    bool operator==(const AssignSubimageStmt&) const = default;
};

enum class MirrorDirection { HostToDevice, DeviceToHost };

/// `U = U[dev]` (device to host) or `U[dev] = U` (host to device).
struct MirrorAssignStmt {
    MirrorDirection direction = MirrorDirection::DeviceToHost;
    std::string array;
    std::string device;
    bool operator==(const MirrorAssignStmt&) const = default;
};

using StmtNode = std::variant<AssignStmt, AllocateStmt, DeallocateStmt, DoCountedStmt, DoConcurrentStmt,
                              HaloTransferStmt, CallKernelStmt, IfStmt, AssignSubimageStmt, MirrorAssignStmt>;

struct Stmt {
    StmtNode node;
    SourcePos pos;
    bool operator==(const Stmt& other) const { return node == other.node; }
};

inline bool DoCountedStmt::operator==(const DoCountedStmt& o) const
{
    return var == o.var && lo == o.lo && hi == o.hi && body == o.body;
}

inline bool IfStmt::operator==(const IfStmt& o) const
{
    return cond == o.cond && body == o.body;
}

// ---------------------------------------------------------------------------
// Program units

struct KernelDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<TypeDecl> decls;
    std::vector<Stmt> body;
    SourcePos pos;
    bool operator==(const KernelDef& o) const
    {
        return name == o.name && params == o.params && decls == o.decls && body == o.body;
    }
};

struct MainDef {
    std::string name;
    std::vector<TypeDecl> decls;
    std::vector<Stmt> body;
    SourcePos pos;
    bool operator==(const MainDef& o) const
    {
        return name == o.name && decls == o.decls && body == o.body;
    }
};

struct Program {
    std::vector<KernelDef> kernels;
    MainDef main;
    bool operator==(const Program&) const = default;

    const KernelDef* find_kernel(const std::string& name) const;
};

std::string_view intrinsic_name(IntrinsicFn fn);
std::optional<IntrinsicFn> intrinsic_from_name(std::string_view name);

} // namespace lope::frontend
