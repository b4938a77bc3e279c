#pragma once

#include "lope/frontend/ast.hpp"
#include "lope/sema/checks.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lope::lowering {

using frontend::Box;
using frontend::IntrinsicFn;
using sema::Footprint;

enum class ValueType { Int, Real };

struct IRExpr;
using IRBox = Box<IRExpr>;

struct ConstNode {
    std::int64_t int_value = 0;
    double real_value = 0.0;
    bool operator==(const ConstNode&) const = default;
};

enum class ScalarKind { Local, Param };

struct ScalarRead {
    ScalarKind kind = ScalarKind::Local;
    std::string name;
    int slot = 0; // index into KernelIR::locals or KernelIR::scalar_params
    bool operator==(const ScalarRead&) const = default;
};

struct OffsetRead {
    std::string array;
    int array_slot = 0; // index into KernelIR::array_params
    std::vector<std::int64_t> offsets;
    int read_slot = 0;        // index into KernelIR::reads
    bool from_output = false; // local element read after this kernel stored it
    bool operator==(const OffsetRead&) const = default;
};

enum class IROp { Add, Mul, Div };

struct BinNode {
    IROp op = IROp::Add;
    IRBox lhs;
    IRBox rhs;
    bool operator==(const BinNode&) const = default;
};

struct NegNode {
    IRBox operand;
    bool operator==(const NegNode&) const = default;
};

struct IntrinsicNode {
    IntrinsicFn fn = IntrinsicFn::Abs;
    std::vector<IRExpr> args;
    bool operator==(const IntrinsicNode&) const = default;
};

using IRNode = std::variant<ConstNode, ScalarRead, OffsetRead, BinNode, NegNode, IntrinsicNode>;

/// Typed expression node. Int operands combine with C/Fortran integer rules;
/// any Real operand makes the result Real.
struct IRExpr {
    IRNode node;
    ValueType type = ValueType::Real;
    bool operator==(const IRExpr&) const = default;
};

struct IRAssign {
    enum class Target { Array, Local } target = Target::Array;
    std::string name;
    int slot = 0; // array_params or locals index
    IRExpr expr;
    bool operator==(const IRAssign&) const = default;
};

struct ArrayParam {
    std::string name;
    int rank = 0;
    ValueType elem = ValueType::Real;
    bool logical = false;
};

struct ScalarVar {
    std::string name;
    ValueType type = ValueType::Real;
};

struct KernelIR {
    std::string name;
    std::vector<std::string> params; // formal order
    std::vector<ArrayParam> array_params;
    std::vector<ScalarVar> scalar_params;
    std::vector<ScalarVar> locals;
    std::vector<Footprint> footprints;   // parallel to array_params
    std::vector<OffsetRead> reads;     // copy of every OffsetRead node, by read_slot
    std::vector<IRAssign> body;

    int array_slot(const std::string& name) const;
};

/// Statement-for-statement translation of a kernel that passed check_kernel.
KernelIR lower_kernel(const frontend::KernelDef& kernel, const sema::SymbolTable& symbols);

/// Readable term form, e.g. `IRAssign(u, Add(Read(u,(0,1)), Neg(Mul(3, Read(u,(0,0))))))`.
std::string dump_ir(const KernelIR& ir);
std::string dump_ir_expr(const IRExpr& e);

// ---------------------------------------------------------------------------
// Point interpreter

struct Value {
    ValueType type = ValueType::Real;
    std::int64_t i = 0;
    double r = 0.0;

    static Value of_int(std::int64_t v) { return {ValueType::Int, v, 0.0}; }
    static Value of_real(double v) { return {ValueType::Real, 0, v}; }
    double as_real() const { return type == ValueType::Int ? static_cast<double>(i) : r; }
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Source of array values at one kernel point. `read` receives the read node
/// (which carries the slot numbers) and returns the stored element.
class PointAccess {
  public:
    virtual ~PointAccess() = default;
    virtual double read(const OffsetRead& r) = 0;
    virtual void write(int array_slot, double value) = 0;
};

/// Runs the kernel body once at a point. `scalar_args` is parallel to
/// ir.scalar_params. Locals start at zero.
void run_point(const KernelIR& ir, const std::vector<Value>& scalar_args, PointAccess& access);

Value eval_expr(const IRExpr& e, const std::vector<Value>& locals, const std::vector<Value>& scalar_args,
                PointAccess& access);

/// Converts a value to the storage representation of an element type.
double store_value(ValueType elem, const Value& v);

} // namespace lope::lowering
