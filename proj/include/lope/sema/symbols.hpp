#pragma once

#include "lope/diagnostic.hpp"
#include "lope/frontend/ast.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lope::sema {

using frontend::BaseType;
using frontend::HaloSpec;

enum class AllocState { Unallocated, HostAllocated, DeviceMirrored };

/// One declared name: a scalar (rank 0) or an array, possibly a coarray.
struct ArrayEntity {
    std::string name;
    BaseType elem_type = BaseType::Real;
    int rank = 0;
    int corank = 0;
    std::optional<HaloSpec> halo;
    bool allocatable = false;
    AllocState alloc_state = AllocState::Unallocated;
    std::vector<std::pair<std::int64_t, std::int64_t>> bounds; // per dim, once allocated
    bool is_param = false;                                     // kernel formal parameter
    SourcePos pos;

    bool is_scalar() const { return rank == 0; }
    bool is_coarray() const { return corank > 0; }
};

/// Names declared in one program unit, in declaration order.
class Scope {
  public:
    /// Returns false (and leaves the scope unchanged) if the name already exists.
    bool insert(ArrayEntity entity);
    const ArrayEntity* find(const std::string& name) const;
    ArrayEntity* find(const std::string& name);
    const std::vector<ArrayEntity>& entities() const { return entities_; }

  private:
    std::vector<ArrayEntity> entities_;
    std::map<std::string, std::size_t> index_;
};

struct SymbolTable {
    Scope main;
    std::map<std::string, Scope> kernels;

    const Scope* kernel_scope(const std::string& kernel) const;
};

struct SymbolResult {
    SymbolTable table;
    DiagnosticList diagnostics;
};

/// Records every declaration of the main program and of each kernel. Reports
/// E010 (duplicate), E011 (undeclared name in a main-program statement or an
/// undeclared kernel parameter), E012 (halo/rank/extent problems) and E105
/// (corank neither 0 nor the rank).
SymbolResult build_symbol_table(const frontend::Program& program);

/// Rank implied by a declaration: dimension count, else halo dim count, else 0.
int declared_rank(const frontend::TypeDecl& decl);

inline constexpr int kMaxHaloExtent = 8;
inline constexpr int kMaxRank = 3;
inline constexpr int kMaxCorank = 2;

} // namespace lope::sema
