#include "lope/runtime/simulator.hpp"

#include <cmath>
#include <limits>

namespace lope::runtime {

using namespace lowering;
using frontend::BinaryOp;
using frontend::CompareOp;
using frontend::Expr;
using frontend::IntrinsicFn;
using frontend::SectionRef;

namespace {

std::int64_t wrap_op(std::int64_t a, std::int64_t b, BinaryOp op)
{
    auto x = static_cast<std::uint64_t>(a);
    auto y = static_cast<std::uint64_t>(b);
    switch (op) {
    case BinaryOp::Add: return static_cast<std::int64_t>(x + y);
    case BinaryOp::Sub: return static_cast<std::int64_t>(x - y);
    case BinaryOp::Mul: return static_cast<std::int64_t>(x * y);
    case BinaryOp::Div: break;
    }
    if (b == 0)
        throw RuntimeError(std::nullopt, "integer division by zero");
    if (b == -1)
        return static_cast<std::int64_t>(0 - x);
    return a / b;
}

std::int64_t truncate(double v)
{
    if (!std::isfinite(v) || v >= 9.2233720368547758e18 || v < -9.2233720368547758e18)
        throw RuntimeError(std::nullopt, "real value out of integer range");
    return static_cast<std::int64_t>(std::trunc(v));
}

struct Frame {
    const std::vector<Action>* body = nullptr;
    std::size_t next = 0;
    const LoopCounted* loop = nullptr;
    std::int64_t hi = 0;
};

struct Image {
    int index = 1;
    std::map<std::string, Value> env;
    std::vector<Frame> stack;
    bool done = false;
};

class Simulator {
  public:
    Simulator(const HostPlan& plan, const sema::SymbolTable& symbols, const RunConfig& cfg, const SourcePos& pos)
        : plan_(plan), symbols_(symbols), cfg_(cfg), pos_(pos)
    {
    }

    RunResult run()
    {
        try {
            grid_ = create_grid(cfg_.images, cfg_.grid_rows);
        } catch (RuntimeError& e) {
            e.pos = grid_pos();
            throw;
        }
        if (cfg_.devices < 0)
            throw RuntimeError(std::nullopt, "device count must be non-negative", pos_);
        io_ = io_array_name(symbols_);
        bind_runtime_names();

        for (int k = 1; k <= grid_.images; ++k) {
            Image img;
            img.index = k;
            for (const auto& e : symbols_.main.entities()) {
                if (e.is_scalar())
                    img.env[e.name] = e.elem_type == frontend::BaseType::Real ? Value::of_real(0.0) : Value::of_int(0);
            }
            img.stack.push_back({&plan_.actions, 0, nullptr, 0});
            images_.push_back(std::move(img));
        }

        while (true) {
            std::vector<const Action*> waiting(images_.size(), nullptr);
            for (std::size_t k = 0; k < images_.size(); ++k) {
                if (!images_[k].done)
                    waiting[k] = run_to_collective(images_[k]);
            }
            const Action* at = nullptr;
            int done = 0;
            for (std::size_t k = 0; k < images_.size(); ++k) {
                if (images_[k].done) {
                    ++done;
                    continue;
                }
                if (at == nullptr) {
                    at = waiting[k];
                } else if (waiting[k] != at) {
                    throw RuntimeError(std::nullopt,
                                       "images wait at different synchronisation points (lines " +
                                           std::to_string(at->pos.line) + " and " +
                                           std::to_string(waiting[k]->pos.line) + ")",
                                       waiting[k]->pos);
                }
            }
            if (at == nullptr)
                break;
            if (done != 0) {
                throw RuntimeError(std::nullopt, std::to_string(done) + " image(s) ended while others wait here",
                                   at->pos);
            }
            ++result_.stats.barriers;
            try {
                collective(*at);
            } catch (RuntimeError& e) {
                if (e.pos.file.empty())
                    e.pos = at->pos;
                throw;
            }
        }

        if (io_ && !result_.output) {
            auto it = arrays_.find(*io_);
            if (it != arrays_.end() && all_allocated(it->second))
                result_.output = gather_global(it->second);
        }
        for (const auto& img : images_)
            result_.env.push_back(img.env);
        return std::move(result_);
    }

  private:
    SourcePos grid_pos() const
    {
        return plan_.actions.empty() ? pos_ : plan_.actions.front().pos;
    }

    // m, n: per-image interior extents of the I/O array; mp, np: grid shape;
    // nsteps: step count.
    void bind_runtime_names()
    {
        std::int64_t gm = cfg_.input ? cfg_.input->m : cfg_.default_extent;
        std::int64_t gn = cfg_.input ? cfg_.input->n : cfg_.default_extent;
        std::vector<std::int64_t> shape{grid_.rows, grid_.cols};
        if (io_) {
            const sema::ArrayEntity* e = symbols_.main.find(*io_);
            shape = coarray_shape(grid_, e->corank);
            if (e->rank == 1) {
                if (!cfg_.input)
                    gn = 1;
                if (gn != 1) {
                    throw RuntimeError(ErrorCode::AllocShapeMismatch,
                                       "array '" + *io_ + "' is 1-D but the input has " + std::to_string(gn) +
                                           " rows",
                                       grid_pos());
                }
            }
        }
        auto split = [&](std::int64_t global, std::size_t d, const char* name) {
            std::int64_t parts = d < shape.size() ? shape[d] : 1;
            if (global % parts != 0) {
                throw RuntimeError(ErrorCode::GridFactorization,
                                   std::string("global extent ") + std::to_string(global) + " of " + name +
                                       " is not divisible by " + std::to_string(parts) + " images",
                                   grid_pos());
            }
            return global / parts;
        };
        bound_["m"] = split(gm, 0, "dimension 1");
        bound_["n"] = gn == 1 && shape.size() < 2 ? 1 : split(gn, 1, "dimension 2");
        bound_["mp"] = grid_.rows;
        bound_["np"] = grid_.cols;
        bound_["nsteps"] = cfg_.steps;
    }

    static bool all_allocated(const DistributedArray& a)
    {
        for (const auto& b : a.blocks)
            if (!b.allocated)
                return false;
        return true;
    }

    bool is_collective(const Action& a) const
    {
        if (std::holds_alternative<HaloTransfer>(a.node))
            return true;
        const std::string* name = nullptr;
        if (const auto* x = std::get_if<AllocCoarray>(&a.node))
            name = &x->array;
        if (const auto* x = std::get_if<Deallocate>(&a.node))
            name = &x->array;
        if (name == nullptr)
            return false;
        const sema::ArrayEntity* e = symbols_.main.find(*name);
        return e != nullptr && e->is_coarray();
    }

    const Action* run_to_collective(Image& img)
    {
        while (!img.stack.empty()) {
            Frame& f = img.stack.back();
            if (f.next == f.body->size()) {
                if (f.loop != nullptr) {
                    Value& v = img.env[f.loop->var];
                    v = Value::of_int(v.i + 1);
                    if (v.i <= f.hi) {
                        f.next = 0;
                        continue;
                    }
                }
                img.stack.pop_back();
                continue;
            }
            const Action& a = (*f.body)[f.next++];
            if (is_collective(a))
                return &a;
            try {
                std::visit([&](const auto& n) { exec(img, n); }, a.node);
            } catch (RuntimeError& e) {
                if (e.pos.file.empty())
                    e.pos = a.pos;
                throw;
            } catch (const EvalError& e) {
                throw RuntimeError(std::nullopt, e.what(), a.pos);
            } catch (const std::out_of_range& e) {
                throw RuntimeError(ErrorCode::HaloBoundsExceeded, e.what(), a.pos);
            }
        }
        img.done = true;
        return nullptr;
    }

    // -- expressions --------------------------------------------------------

    Value eval(const Expr& e, Image& img)
    {
        return std::visit(
            [&](const auto& n) -> Value {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, frontend::RealLit>) {
                    return Value::of_real(n.value);
                } else if constexpr (std::is_same_v<T, frontend::IntLit>) {
                    return Value::of_int(n.value);
                } else if constexpr (std::is_same_v<T, frontend::Ident>) {
                    auto it = img.env.find(n.name);
                    if (it == img.env.end())
                        throw RuntimeError(std::nullopt, "'" + n.name + "' is not a scalar", e.pos);
                    return it->second;
                } else if constexpr (std::is_same_v<T, SectionRef>) {
                    auto cells = section_cells(n, img);
                    if (cells.indices.size() != 1)
                        throw RuntimeError(std::nullopt, "array section used as a scalar", e.pos);
                    return Value::of_real((*cells.data)[cells.indices[0]]);
                } else if constexpr (std::is_same_v<T, frontend::BinaryExpr>) {
                    Value a = eval(*n.lhs, img);
                    Value b = eval(*n.rhs, img);
                    if (a.type == ValueType::Int && b.type == ValueType::Int)
                        return Value::of_int(wrap_op(a.i, b.i, n.op));
                    double x = a.as_real();
                    double y = b.as_real();
                    switch (n.op) {
                    case BinaryOp::Add: return Value::of_real(x + y);
                    case BinaryOp::Sub: return Value::of_real(x - y);
                    case BinaryOp::Mul: return Value::of_real(x * y);
                    case BinaryOp::Div: return Value::of_real(x / y);
                    }
                    return {};
                } else if constexpr (std::is_same_v<T, frontend::CompareExpr>) {
                    Value a = eval(*n.lhs, img);
                    Value b = eval(*n.rhs, img);
                    bool r = false;
                    if (a.type == ValueType::Int && b.type == ValueType::Int) {
                        switch (n.op) {
                        case CompareOp::Ne: r = a.i != b.i; break;
                        case CompareOp::Eq: r = a.i == b.i; break;
                        case CompareOp::Lt: r = a.i < b.i; break;
                        case CompareOp::Gt: r = a.i > b.i; break;
                        }
                    } else {
                        double x = a.as_real();
                        double y = b.as_real();
                        switch (n.op) {
                        case CompareOp::Ne: r = x != y; break;
                        case CompareOp::Eq: r = x == y; break;
                        case CompareOp::Lt: r = x < y; break;
                        case CompareOp::Gt: r = x > y; break;
                        }
                    }
                    return Value::of_int(r ? 1 : 0);
                } else if constexpr (std::is_same_v<T, frontend::NegExpr>) {
                    Value a = eval(*n.operand, img);
                    return a.type == ValueType::Int ? Value::of_int(wrap_op(0, a.i, BinaryOp::Sub))
                                                    : Value::of_real(-a.r);
                } else if constexpr (std::is_same_v<T, frontend::IntrinsicCall>) {
                    if (n.fn == IntrinsicFn::ThisImage)
                        return Value::of_int(img.index);
                    std::vector<Value> args;
                    bool all_int = true;
                    for (const auto& x : n.args) {
                        args.push_back(eval(x, img));
                        all_int = all_int && args.back().type == ValueType::Int;
                    }
                    if (args.empty())
                        throw RuntimeError(std::nullopt, "intrinsic without arguments", e.pos);
                    switch (n.fn) {
                    case IntrinsicFn::Abs:
                        return all_int ? Value::of_int(args[0].i < 0 ? wrap_op(0, args[0].i, BinaryOp::Sub) : args[0].i)
                                       : Value::of_real(std::fabs(args[0].as_real()));
                    case IntrinsicFn::Sqrt: return Value::of_real(std::sqrt(args[0].as_real()));
                    case IntrinsicFn::Min:
                    case IntrinsicFn::Max: {
                        bool is_min = n.fn == IntrinsicFn::Min;
                        if (all_int) {
                            std::int64_t acc = args[0].i;
                            for (const auto& v : args)
                                acc = is_min ? std::min(acc, v.i) : std::max(acc, v.i);
                            return Value::of_int(acc);
                        }
                        double acc = args[0].as_real();
                        for (const auto& v : args)
                            acc = is_min ? std::fmin(acc, v.as_real()) : std::fmax(acc, v.as_real());
                        return Value::of_real(acc);
                    }
                    case IntrinsicFn::ThisImage: break;
                    }
                    return {};
                } else {
                    throw RuntimeError(std::nullopt, "offset reference outside a kernel", e.pos);
                }
            },
            e.node);
    }

    std::int64_t eval_int(const Expr& e, Image& img)
    {
        Value v = eval(e, img);
        if (v.type != ValueType::Int)
            throw RuntimeError(std::nullopt, "integer expression expected", e.pos);
        return v.i;
    }

    // -- arrays -------------------------------------------------------------

    DistributedArray& array(const std::string& name)
    {
        auto it = arrays_.find(name);
        if (it == arrays_.end())
            throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + name + "' is not allocated");
        return it->second;
    }

    Block& allocated_block(const std::string& name, int image)
    {
        Block& b = array(name).block(image);
        if (!b.allocated) {
            throw RuntimeError(ErrorCode::UnallocatedUse,
                               "array '" + name + "' is not allocated on image " + std::to_string(image));
        }
        return b;
    }

    struct Cells {
        std::vector<double>* data = nullptr;
        std::vector<std::size_t> indices; // column-major order over the section
        std::vector<std::int64_t> shape;  // extents of the non-scalar dims
    };

    Cells section_cells(const SectionRef& ref, Image& img)
    {
        DistributedArray& a = array(ref.array);
        int image = img.index;
        if (!ref.cosubscripts.empty()) {
            if (static_cast<int>(ref.cosubscripts.size()) != a.corank) {
                throw RuntimeError(std::nullopt, "array '" + ref.array + "' has corank " +
                                                     std::to_string(a.corank) + ", got " +
                                                     std::to_string(ref.cosubscripts.size()) + " cosubscripts");
            }
            std::vector<std::int64_t> co;
            for (const auto& c : ref.cosubscripts)
                co.push_back(eval_int(c, img));
            image = image_of(a.shape, co);
        }
        Block& b = allocated_block(ref.array, image);
        if (static_cast<int>(ref.subscripts.size()) != a.rank) {
            throw RuntimeError(std::nullopt, "array '" + ref.array + "' has rank " + std::to_string(a.rank) +
                                                 ", got " + std::to_string(ref.subscripts.size()) + " subscripts");
        }
        std::vector<std::vector<std::int64_t>> coords;
        Cells out;
        out.data = &b.host;
        for (int d = 0; d < a.rank; ++d) {
            std::int64_t padded = a.layout.padded(d);
            std::vector<std::int64_t> c;
            const auto& s = ref.subscripts[static_cast<std::size_t>(d)];
            if (s.index) {
                std::int64_t x = eval_int(**s.index, img);
                std::int64_t sc = x - a.lower(d);
                if (sc < 0 || sc >= padded) {
                    throw RuntimeError(std::nullopt, "subscript " + std::to_string(x) + " outside bounds " +
                                                         std::to_string(a.lower(d)) + ":" +
                                                         std::to_string(a.lower(d) + padded - 1) + " of '" +
                                                         ref.array + "' dimension " + std::to_string(d + 1));
                }
                c.push_back(sc);
            } else {
                for (std::int64_t k = 0; k < padded; ++k)
                    c.push_back(k);
                out.shape.push_back(padded);
            }
            coords.push_back(std::move(c));
        }
        std::vector<std::size_t> pos(coords.size(), 0);
        std::vector<std::int64_t> cell(coords.size());
        while (true) {
            for (std::size_t d = 0; d < coords.size(); ++d)
                cell[d] = coords[d][pos[d]];
            out.indices.push_back(static_cast<std::size_t>(a.layout.linear(cell)));
            std::size_t d = 0;
            for (; d < pos.size(); ++d) {
                if (++pos[d] < coords[d].size())
                    break;
                pos[d] = 0;
            }
            if (d == pos.size())
                break;
        }
        return out;
    }

    StorageLayout layout_for(const AllocCoarray& a, Image& img, const sema::ArrayEntity& e)
    {
        if (static_cast<int>(a.bounds.size()) != e.rank) {
            throw RuntimeError(ErrorCode::AllocShapeMismatch, "array '" + a.array + "' has rank " +
                                                                  std::to_string(e.rank) + ", allocated with " +
                                                                  std::to_string(a.bounds.size()) + " bounds");
        }
        std::vector<std::int64_t> extent, lo, hi;
        for (int d = 0; d < e.rank; ++d) {
            const auto& b = a.bounds[static_cast<std::size_t>(d)];
            std::int64_t hl = 0, hh = 0;
            if (e.halo && e.halo->dims[static_cast<std::size_t>(d)]) {
                hl = e.halo->dims[static_cast<std::size_t>(d)]->lo;
                hh = e.halo->dims[static_cast<std::size_t>(d)]->hi;
            }
            std::int64_t l = b.lo ? eval_int(*b.lo, img) : 1;
            std::int64_t h = eval_int(b.hi, img);
            if (l != 1 - hl) {
                throw RuntimeError(ErrorCode::AllocShapeMismatch,
                                   "array '" + a.array + "' dimension " + std::to_string(d + 1) +
                                       ": lower bound " + std::to_string(l) + " must be " + std::to_string(1 - hl) +
                                       " to hold a low halo of " + std::to_string(hl));
            }
            extent.push_back(h - l + 1 - hl - hh);
            lo.push_back(hl);
            hi.push_back(hh);
        }
        return StorageLayout(extent, lo, hi);
    }

    // -- collectives --------------------------------------------------------

    void collective(const Action& action)
    {
        if (const auto* a = std::get_if<AllocCoarray>(&action.node)) {
            alloc_collective(*a);
        } else if (const auto* d = std::get_if<Deallocate>(&action.node)) {
            DistributedArray& arr = array(d->array);
            if (!all_allocated(arr))
                throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + d->array + "' is not allocated");
            if (io_ && *io_ == d->array)
                result_.output = gather_global(arr);
            arrays_.erase(d->array);
        } else {
            const auto& h = std::get<HaloTransfer>(action.node);
            DistributedArray& arr = array(h.array);
            halo_transfer(arr, result_.stats.transfer);
        }
    }

    void alloc_collective(const AllocCoarray& a)
    {
        const sema::ArrayEntity* e = symbols_.main.find(a.array);
        if (arrays_.count(a.array) != 0)
            throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + a.array + "' is already allocated");
        std::optional<StorageLayout> layout;
        std::vector<std::int64_t> shape;
        for (auto& img : images_) {
            StorageLayout l = layout_for(a, img, *e);
            if (layout && !(l == *layout)) {
                throw RuntimeError(ErrorCode::AllocShapeMismatch,
                                   "array '" + a.array + "' allocated with different shapes on different images");
            }
            layout = l;
            std::vector<std::int64_t> s;
            std::int64_t known = 1;
            for (const auto& c : a.cobounds) {
                std::int64_t v = c.extent ? eval_int(*c.extent, img) : 0;
                if (c.extent && v < 1) {
                    throw RuntimeError(ErrorCode::GridFactorization,
                                       "cobound " + std::to_string(v) + " of '" + a.array + "' is not positive");
                }
                s.push_back(v);
                known *= c.extent ? v : 1;
            }
            if (!s.empty() && s.back() == 0) {
                if (grid_.images % known != 0) {
                    throw RuntimeError(ErrorCode::GridFactorization,
                                       "cobounds of '" + a.array + "' do not factor " +
                                           std::to_string(grid_.images) + " images");
                }
                s.back() = grid_.images / known;
            }
            if (static_cast<int>(s.size()) != e->corank) {
                throw RuntimeError(ErrorCode::AllocShapeMismatch, "array '" + a.array + "' has corank " +
                                                                      std::to_string(e->corank));
            }
            std::int64_t product = 1;
            for (auto v : s)
                product *= v;
            if (product != grid_.images) {
                throw RuntimeError(ErrorCode::GridFactorization,
                                   "cobounds of '" + a.array + "' describe " + std::to_string(product) +
                                       " images, not " + std::to_string(grid_.images));
            }
            shape = s;
        }
        DistributedArray arr = alloc_coarray(grid_.images, shape, a.array, e->corank, *layout);
        if (io_ && *io_ == a.array && cfg_.input)
            scatter_global(arr, *cfg_.input);
        arrays_.emplace(a.array, std::move(arr));
    }

    // -- per-image actions --------------------------------------------------

    void exec(Image& img, const GridSetup&)
    {
        for (const auto& [name, v] : bound_) {
            const sema::ArrayEntity* e = symbols_.main.find(name);
            if (e != nullptr && e->is_scalar() && e->elem_type == frontend::BaseType::Integer)
                img.env[name] = Value::of_int(v);
        }
    }

    void exec(Image& img, const AllocCoarray& a)
    {
        // Non-coarray allocatable: private to the image.
        const sema::ArrayEntity* e = symbols_.main.find(a.array);
        StorageLayout l = layout_for(a, img, *e);
        auto it = arrays_.find(a.array);
        if (it == arrays_.end()) {
            DistributedArray arr = alloc_coarray(grid_.images, {}, a.array, 0, l);
            for (auto& b : arr.blocks) {
                b.allocated = false;
                b.host.clear();
            }
            it = arrays_.emplace(a.array, std::move(arr)).first;
        }
        Block& b = it->second.block(img.index);
        if (b.allocated)
            throw RuntimeError(ErrorCode::UnallocatedUse, "array '" + a.array + "' is already allocated");
        if (!(it->second.layout == l)) {
            throw RuntimeError(ErrorCode::AllocShapeMismatch,
                               "array '" + a.array + "' allocated with different shapes on different images");
        }
        b.allocated = true;
        b.host.assign(static_cast<std::size_t>(l.cell_count()), 0.0);
    }

    void exec(Image& img, const Deallocate& d)
    {
        Block& b = allocated_block(d.array, img.index);
        b.allocated = false;
        b.host.clear();
        b.mirror.reset();
    }

    void exec(Image& img, const GetSubimage& g)
    {
        bool attached = g.device >= 1 && g.device <= cfg_.devices;
        img.env[g.var] = Value::of_int(attached ? grid_.images + g.device : img.index);
    }

    std::int64_t handle(Image& img, const std::string& var)
    {
        auto it = img.env.find(var);
        if (it == img.env.end() || it->second.type != ValueType::Int)
            throw RuntimeError(std::nullopt, "'" + var + "' does not hold a subimage");
        std::int64_t h = it->second.i;
        if (h != img.index && (h <= grid_.images || h > grid_.images + cfg_.devices)) {
            throw RuntimeError(std::nullopt, "'" + var + "' = " + std::to_string(h) +
                                                 " is neither this image nor one of its subimages");
        }
        return h;
    }

    void exec(Image& img, const DeviceAllocFrom& a)
    {
        std::int64_t h = handle(img, a.device);
        if (h == img.index)
            return;
        Block& b = allocated_block(a.array, img.index);
        if (b.mirror) {
            throw RuntimeError(ErrorCode::UnallocatedUse,
                               "array '" + a.array + "' already has a mirror on subimage " +
                                   std::to_string(b.mirror->device));
        }
        b.mirror = DeviceBuffer{h, true, b.host, b.halo_epoch};
    }

    void exec(Image& img, const MirrorCopy& m)
    {
        std::int64_t h = handle(img, m.device);
        if (h == img.index)
            return;
        Block& b = allocated_block(m.array, img.index);
        if (!b.mirror || b.mirror->device != h) {
            throw RuntimeError(ErrorCode::UnallocatedUse,
                               "array '" + m.array + "' has no mirror on subimage " + std::to_string(h));
        }
        if (m.direction == frontend::MirrorDirection::DeviceToHost) {
            b.host = b.mirror->data;
            b.halo_epoch = b.mirror->halo_epoch;
        } else {
            b.mirror->data = b.host;
            b.mirror->halo_epoch = b.halo_epoch;
        }
        ++result_.stats.mirror_copies;
    }

    void exec(Image& img, const LaunchConcurrent& l)
    {
        const KernelIR& ir = plan_.kernels.at(l.kernel);
        std::int64_t h = l.target ? handle(img, *l.target) : img.index;
        bool on_device = h != img.index;
        if (l.args.size() != ir.params.size()) {
            throw RuntimeError(std::nullopt, "kernel '" + l.kernel + "' takes " + std::to_string(ir.params.size()) +
                                                 " arguments, got " + std::to_string(l.args.size()));
        }
        std::vector<LaunchBuffer> buffers(ir.array_params.size());
        std::vector<Value> scalars(ir.scalar_params.size());
        const DistributedArray* first = nullptr;
        for (std::size_t p = 0; p < ir.params.size(); ++p) {
            const std::string& formal = ir.params[p];
            const LaunchArg& arg = l.args[p];
            int slot = ir.array_slot(formal);
            if (slot >= 0) {
                if (!arg.array)
                    throw RuntimeError(std::nullopt, "argument " + std::to_string(p + 1) + " must be an array");
                DistributedArray& a = array(*arg.array);
                Block& b = allocated_block(*arg.array, img.index);
                const ArrayParam& ap = ir.array_params[static_cast<std::size_t>(slot)];
                if (a.rank != ap.rank) {
                    throw RuntimeError(ErrorCode::ShapeMismatch, "array '" + a.name + "' has rank " +
                                                                     std::to_string(a.rank) + ", kernel expects " +
                                                                     std::to_string(ap.rank));
                }
                const Footprint& fp = ir.footprints[static_cast<std::size_t>(slot)];
                for (int d = 0; d < a.rank; ++d) {
                    auto sd = static_cast<std::size_t>(d);
                    if (fp[sd].max_neg > a.layout.halo_lo[sd] || fp[sd].max_pos > a.layout.halo_hi[sd]) {
                        throw RuntimeError(ErrorCode::HaloBoundsExceeded,
                                           "kernel '" + l.kernel + "' reads " + std::to_string(fp[sd].max_neg) +
                                               ":" + std::to_string(fp[sd].max_pos) + " around '" + a.name +
                                               "' in dimension " + std::to_string(d + 1) + " but its halo is " +
                                               std::to_string(a.layout.halo_lo[sd]) + ":" +
                                               std::to_string(a.layout.halo_hi[sd]));
                    }
                }
                std::uint64_t epoch = b.halo_epoch;
                if (on_device) {
                    if (!b.mirror || b.mirror->device != h) {
                        throw RuntimeError(ErrorCode::UnallocatedUse,
                                           "array '" + a.name + "' has no mirror on subimage " + std::to_string(h));
                    }
                    buffers[static_cast<std::size_t>(slot)] = {&b.mirror->data, &a.layout};
                    epoch = b.mirror->halo_epoch;
                } else {
                    buffers[static_cast<std::size_t>(slot)] = {&b.host, &a.layout};
                }
                if (epoch != a.halo_epoch)
                    ++result_.stats.stale_launches;
                if (first == nullptr)
                    first = &a;
            } else {
                if (!arg.scalar)
                    throw RuntimeError(std::nullopt, "argument " + std::to_string(p + 1) + " must be a scalar");
                int s = 0;
                while (ir.scalar_params[static_cast<std::size_t>(s)].name != formal)
                    ++s;
                Value v = eval(*arg.scalar, img);
                scalars[static_cast<std::size_t>(s)] =
                    ir.scalar_params[static_cast<std::size_t>(s)].type == ValueType::Int
                        ? Value::of_int(v.type == ValueType::Int ? v.i : truncate(v.r))
                        : Value::of_real(v.as_real());
            }
        }
        std::vector<std::int64_t> lo, hi;
        for (const auto& r : l.ranges) {
            lo.push_back(eval_int(r.lo, img));
            hi.push_back(eval_int(r.hi, img));
        }
        if (first != nullptr) {
            if (static_cast<int>(lo.size()) != first->rank) {
                throw RuntimeError(ErrorCode::ShapeMismatch, std::to_string(lo.size()) +
                                                                 " index ranges for rank " +
                                                                 std::to_string(first->rank) + " arrays");
            }
            for (const auto& b : buffers) {
                for (int d = 0; d < b.layout->rank(); ++d) {
                    auto sd = static_cast<std::size_t>(d);
                    if (lo[sd] <= hi[sd] && (lo[sd] < 1 || hi[sd] > b.layout->extent[sd])) {
                        throw RuntimeError(ErrorCode::HaloBoundsExceeded,
                                           "index range " + std::to_string(lo[sd]) + ":" + std::to_string(hi[sd]) +
                                               " leaves the interior 1:" + std::to_string(b.layout->extent[sd]));
                    }
                }
            }
        }
        LaunchOrder order = cfg_.order;
        order.seed = cfg_.order.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(img.index);
        result_.stats.points += launch_concurrent(ir, buffers, lo, hi, scalars, order);
        ++result_.stats.launches;
        if (on_device)
            ++result_.stats.device_launches;
    }

    void exec(Image&, const HaloTransfer&) {}

    void exec(Image& img, const SectionCopy& c)
    {
        Cells src = section_cells(c.src, img);
        std::vector<double> values;
        values.reserve(src.indices.size());
        for (auto k : src.indices)
            values.push_back((*src.data)[k]);
        Cells dst = section_cells(c.dst, img);
        if (dst.indices.size() != values.size()) {
            throw RuntimeError(std::nullopt, "sections are not conformable: " + std::to_string(dst.indices.size()) +
                                                 " elements on the left, " + std::to_string(values.size()) +
                                                 " on the right");
        }
        for (std::size_t k = 0; k < values.size(); ++k)
            (*dst.data)[dst.indices[k]] = values[k];
    }

    void exec(Image& img, const SectionFill& f)
    {
        Value v = eval(f.value, img);
        const sema::ArrayEntity* e = symbols_.main.find(f.array);
        double x = e != nullptr && e->elem_type != frontend::BaseType::Real
                       ? static_cast<double>(v.type == ValueType::Int ? v.i : truncate(v.r))
                       : v.as_real();
        if (f.dst) {
            Cells dst = section_cells(*f.dst, img);
            for (auto k : dst.indices)
                (*dst.data)[k] = x;
        } else {
            Block& b = allocated_block(f.array, img.index);
            std::fill(b.host.begin(), b.host.end(), x);
        }
    }

    void exec(Image& img, const AssignScalar& a)
    {
        Value v = eval(a.value, img);
        const sema::ArrayEntity* e = symbols_.main.find(a.var);
        if (e != nullptr && e->elem_type == frontend::BaseType::Real)
            img.env[a.var] = Value::of_real(v.as_real());
        else
            img.env[a.var] = Value::of_int(v.type == ValueType::Int ? v.i : truncate(v.r));
    }

    void exec(Image& img, const LoopCounted& l)
    {
        std::int64_t lo = eval_int(l.lo, img);
        std::int64_t hi = eval_int(l.hi, img);
        img.env[l.var] = Value::of_int(lo);
        if (lo <= hi)
            img.stack.push_back({&l.body, 0, &l, hi});
    }

    void exec(Image& img, const Conditional& c)
    {
        Value v = eval(c.cond, img);
        bool taken = v.type == ValueType::Int ? v.i != 0 : v.r != 0.0;
        if (taken)
            img.stack.push_back({&c.body, 0, nullptr, 0});
    }

    const HostPlan& plan_;
    const sema::SymbolTable& symbols_;
    const RunConfig& cfg_;
    SourcePos pos_;
    ProcessGrid grid_;
    std::optional<std::string> io_;
    std::map<std::string, std::int64_t> bound_;
    std::map<std::string, DistributedArray> arrays_;
    std::vector<Image> images_;
    RunResult result_;
};

} // namespace

std::optional<std::string> io_array_name(const sema::SymbolTable& symbols)
{
    for (const auto& e : symbols.main.entities()) {
        if (e.halo && e.is_coarray())
            return e.name;
    }
    return std::nullopt;
}

RunResult run_program(const HostPlan& plan, const sema::SymbolTable& symbols, const RunConfig& config,
                      const SourcePos& program_pos)
{
    return Simulator(plan, symbols, config, program_pos).run();
}

} // namespace lope::runtime
