#pragma once

#include "lope/frontend/ast.hpp"
#include "lope/lowering/kernel_ir.hpp"
#include "lope/sema/symbols.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lope::lowering {

using frontend::Expr;
using frontend::MirrorDirection;

struct Action;

struct GridSetup {};

struct AllocCoarray {
    std::string array;
    std::vector<frontend::AllocBound> bounds;
    std::vector<frontend::Cobound> cobounds;
};

struct GetSubimage {
    std::string var;
    std::int64_t device = 1;
};

struct DeviceAllocFrom {
    std::string array;
    std::string device;
};

/// One actual argument of a launch: an array (by name) or a scalar expression.
struct LaunchArg {
    std::optional<std::string> array;
    std::optional<Expr> scalar;
};

struct LaunchConcurrent {
    std::string kernel;
    std::vector<frontend::IndexRange> ranges;
    std::optional<std::string> target; // subimage variable; nullopt = this image
    std::vector<LaunchArg> args;       // parallel to the kernel's formal parameters
};

struct HaloTransfer {
    std::string array;
    frontend::BoundaryKind bc = frontend::BoundaryKind::Cyclic;
};

struct MirrorCopy {
    MirrorDirection direction = MirrorDirection::DeviceToHost;
    std::string array;
    std::string device;
};

/// `A(sec) = B(sec)[cosubs]`: copy between conformable sections.
struct SectionCopy {
    frontend::SectionRef dst;
    frontend::SectionRef src;
};

/// `A(sec) = expr` or whole-array `A = expr`.
struct SectionFill {
    std::string array;
    std::optional<frontend::SectionRef> dst; // nullopt = every allocated cell
    Expr value;
};

struct AssignScalar {
    std::string var;
    Expr value;
};

struct LoopCounted {
    std::string var;
    Expr lo;
    Expr hi;
    std::vector<Action> body;
};

struct Conditional {
    Expr cond;
    std::vector<Action> body;
};

struct Deallocate {
    std::string array;
};

using ActionNode = std::variant<GridSetup, AllocCoarray, GetSubimage, DeviceAllocFrom, LaunchConcurrent,
                                HaloTransfer, MirrorCopy, SectionCopy, SectionFill, AssignScalar, LoopCounted,
                                Conditional, Deallocate>;

struct Action {
    ActionNode node;
    SourcePos pos;
};

struct HostPlan {
    std::vector<Action> actions;
    std::map<std::string, KernelIR> kernels; // every kernel the plan launches
};

/// Rewrites the main program into runtime actions. Expects a program that
/// passed analysis.
HostPlan desugar_device_code(const frontend::Program& program, const sema::SymbolTable& symbols);

/// One action per line, nested groups indented by two spaces.
std::string print_plan(const HostPlan& plan);

} // namespace lope::lowering
