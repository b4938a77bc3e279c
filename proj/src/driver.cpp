#include "lope/driver.hpp"

#include "lope/frontend/parser.hpp"

namespace lope {

Compilation compile(std::string_view source, std::string_view file)
{
    Compilation c;
    auto parsed = frontend::parse_source(source, file);
    c.program = std::move(parsed.program);
    if (parsed.diagnostics.has_errors()) {
        c.diagnostics.append(parsed.diagnostics.sorted());
        return c;
    }
    c.analysis = sema::analyze(c.program);
    c.diagnostics.append(parsed.diagnostics);
    c.diagnostics.append(c.analysis.diagnostics.sorted());
    return c;
}

lowering::HostPlan plan(const Compilation& c)
{
    return lowering::desugar_device_code(c.program, c.analysis.symbols);
}

} // namespace lope
