#include "lope/diagnostic.hpp"

#include <algorithm>
#include <cstdio>

namespace lope {

std::string code_name(ErrorCode code)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "E%03d", static_cast<int>(code));
    return buf;
}

std::string format_diagnostic(const Diagnostic& d)
{
    std::string out = d.pos.file;
    out += ':' + std::to_string(d.pos.line) + ':' + std::to_string(d.pos.col) + ": ";
    out += d.severity == Severity::Error ? "error[" : "warning[";
    out += code_name(d.code) + "]: " + d.message;
    return out;
}

void DiagnosticList::error(ErrorCode code, const SourcePos& pos, std::string message)
{
    items_.push_back({code, Severity::Error, pos, std::move(message)});
}

void DiagnosticList::warning(ErrorCode code, const SourcePos& pos, std::string message)
{
    items_.push_back({code, Severity::Warning, pos, std::move(message)});
}

void DiagnosticList::append(const DiagnosticList& other)
{
    append(other.items_);
}

void DiagnosticList::append(const std::vector<Diagnostic>& other)
{
    items_.insert(items_.end(), other.begin(), other.end());
}

bool DiagnosticList::has_errors() const
{
    return std::any_of(items_.begin(), items_.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::vector<Diagnostic> DiagnosticList::sorted() const
{
    auto out = items_;
    std::stable_sort(out.begin(), out.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.pos < b.pos; });
    return out;
}

} // namespace lope
