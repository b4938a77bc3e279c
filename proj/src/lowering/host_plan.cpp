#include "lope/lowering/host_plan.hpp"

#include "lope/frontend/ast_dump.hpp"

namespace lope::lowering {

using namespace frontend;

namespace {

class Desugarer {
  public:
    Desugarer(const Program& program, const sema::SymbolTable& symbols) : program_(program), symbols_(symbols) {}

    HostPlan run()
    {
        plan_.actions.push_back({GridSetup{}, program_.main.pos});
        lower_block(program_.main.body, plan_.actions);
        return std::move(plan_);
    }

  private:
    void lower_block(const std::vector<Stmt>& body, std::vector<Action>& out)
    {
        for (const auto& s : body)
            std::visit([&](const auto& n) { lower(n, s.pos, out); }, s.node);
    }

    void lower(const AssignStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        if (const auto* id = std::get_if<Ident>(&s.lhs.node)) {
            const sema::ArrayEntity* e = symbols_.main.find(id->name);
            if (e != nullptr && !e->is_scalar())
                out.push_back({SectionFill{id->name, std::nullopt, s.rhs}, pos});
            else
                out.push_back({AssignScalar{id->name, s.rhs}, pos});
            return;
        }
        const auto& dst = std::get<SectionRef>(s.lhs.node);
        if (const auto* src = std::get_if<SectionRef>(&s.rhs.node))
            out.push_back({SectionCopy{dst, *src}, pos});
        else
            out.push_back({SectionFill{dst.array, dst, s.rhs}, pos});
    }

    void lower(const AllocateStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        if (s.exec_target)
            out.push_back({DeviceAllocFrom{s.array, *s.exec_target}, pos});
        else
            out.push_back({AllocCoarray{s.array, s.bounds, s.cobounds}, pos});
    }

    void lower(const DeallocateStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        out.push_back({Deallocate{s.array}, pos});
    }

    void lower(const DoCountedStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        LoopCounted loop{s.var, s.lo, s.hi, {}};
        lower_block(s.body, loop.body);
        out.push_back({std::move(loop), pos});
    }

    void lower(const DoConcurrentStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        LaunchConcurrent launch{s.call.kernel, s.ranges, s.exec_target, {}};
        const KernelDef* k = program_.find_kernel(s.call.kernel);
        if (k != nullptr && plan_.kernels.count(k->name) == 0)
            plan_.kernels.emplace(k->name, lower_kernel(*k, symbols_));
        for (const auto& a : s.call.args) {
            if (const auto* ref = std::get_if<SectionRef>(&a.node))
                launch.args.push_back({ref->array, std::nullopt});
            else
                launch.args.push_back({std::nullopt, a});
        }
        out.push_back({std::move(launch), pos});
    }

    void lower(const HaloTransferStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        out.push_back({HaloTransfer{s.array, s.bc}, pos});
    }

    void lower(const CallKernelStmt&, const SourcePos&, std::vector<Action>&)
    {
        // Rejected by sema; a bare kernel call has no host meaning.
    }

    void lower(const IfStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        Conditional c{s.cond, {}};
        lower_block(s.body, c.body);
        out.push_back({std::move(c), pos});
    }

    void lower(const AssignSubimageStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        out.push_back({GetSubimage{s.var, s.device}, pos});
    }

    void lower(const MirrorAssignStmt& s, const SourcePos& pos, std::vector<Action>& out)
    {
        out.push_back({MirrorCopy{s.direction, s.array, s.device}, pos});
    }

    const Program& program_;
    const sema::SymbolTable& symbols_;
    HostPlan plan_;
};

std::string section_text(const SectionRef& ref)
{
    return to_source(Expr{ref, {}});
}

class Printer {
  public:
    std::string out;

    void block(const std::vector<Action>& actions, int depth)
    {
        for (const auto& a : actions)
            std::visit([&](const auto& n) { print(n, depth); }, a.node);
    }

  private:
    void line(int depth, const std::string& text)
    {
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += text;
        out += '\n';
    }

    void print(const GridSetup&, int d) { line(d, "GridSetup"); }

    void print(const AllocCoarray& a, int d)
    {
        std::string s = "AllocCoarray " + a.array + " (";
        for (std::size_t i = 0; i < a.bounds.size(); ++i) {
            if (i != 0)
                s += ", ";
            if (a.bounds[i].lo)
                s += to_source(*a.bounds[i].lo) + ":";
            s += to_source(a.bounds[i].hi);
        }
        s += ")";
        if (!a.cobounds.empty()) {
            s += " [";
            for (std::size_t i = 0; i < a.cobounds.size(); ++i) {
                if (i != 0)
                    s += ", ";
                s += a.cobounds[i].extent ? to_source(*a.cobounds[i].extent) : "*";
            }
            s += "]";
        }
        line(d, s);
    }

    void print(const GetSubimage& a, int d) { line(d, "GetSubimage " + a.var + " " + std::to_string(a.device)); }

    void print(const DeviceAllocFrom& a, int d) { line(d, "DeviceAllocFrom " + a.array + " " + a.device); }

    void print(const LaunchConcurrent& a, int d)
    {
        std::string s = "LaunchConcurrent " + a.kernel + " (";
        for (std::size_t i = 0; i < a.ranges.size(); ++i) {
            if (i != 0)
                s += ", ";
            s += a.ranges[i].var + " = " + to_source(a.ranges[i].lo) + ":" + to_source(a.ranges[i].hi);
        }
        s += ") on " + (a.target ? *a.target : std::string("this_image()")) + " args (";
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i != 0)
                s += ", ";
            s += a.args[i].array ? *a.args[i].array : to_source(*a.args[i].scalar);
        }
        line(d, s + ")");
    }

    void print(const HaloTransfer& a, int d) { line(d, "HaloTransfer " + a.array + " cyclic"); }

    void print(const MirrorCopy& a, int d)
    {
        line(d, std::string("MirrorCopy ") +
                    (a.direction == MirrorDirection::DeviceToHost ? "deviceToHost " : "hostToDevice ") + a.array +
                    " " + a.device);
    }

    void print(const SectionCopy& a, int d)
    {
        line(d, "SectionCopy " + section_text(a.dst) + " = " + section_text(a.src));
    }

    void print(const SectionFill& a, int d)
    {
        line(d, "SectionFill " + (a.dst ? section_text(*a.dst) : a.array) + " = " + to_source(a.value));
    }

    void print(const AssignScalar& a, int d) { line(d, "AssignScalar " + a.var + " = " + to_source(a.value)); }

    void print(const LoopCounted& a, int d)
    {
        line(d, "Loop " + a.var + " = " + to_source(a.lo) + ", " + to_source(a.hi));
        block(a.body, d + 1);
        line(d, "EndLoop");
    }

    void print(const Conditional& a, int d)
    {
        line(d, "If " + to_source(a.cond));
        block(a.body, d + 1);
        line(d, "EndIf");
    }

    void print(const Deallocate& a, int d) { line(d, "Deallocate " + a.array); }
};

} // namespace

HostPlan desugar_device_code(const Program& program, const sema::SymbolTable& symbols)
{
    return Desugarer(program, symbols).run();
}

std::string print_plan(const HostPlan& plan)
{
    Printer p;
    p.block(plan.actions, 0);
    return p.out;
}

} // namespace lope::lowering
