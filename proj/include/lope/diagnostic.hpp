#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lope {

struct SourcePos {
    std::string file;
    int line = 1;
    int col = 1;

    auto operator<=>(const SourcePos&) const = default;
};

// Closed table of diagnostic codes. The numeric value is the printed number.
enum class ErrorCode : int {
    Lex = 1,
    Parse = 2,
    DuplicateDecl = 10,
    Undeclared = 11,
    ShapeMismatch = 12,
    HaloWrite = 101,
    HaloBoundsExceeded = 102,
    StoreThenHaloRead = 103,
    ImpureKernel = 104,
    RankCorankMismatch = 105,
    MissingHalo = 106,
    DeviceVarNotSubimage = 107,
    AllocShapeMismatch = 108,
    GridFactorization = 201,
    UnallocatedUse = 202,
};

/// "E101" etc.
std::string code_name(ErrorCode code);

enum class Severity { Error, Warning };

struct Diagnostic {
    ErrorCode code = ErrorCode::Parse;
    Severity severity = Severity::Error;
    SourcePos pos;
    std::string message;
};

/// `file:line:col: error[E###]: message`
std::string format_diagnostic(const Diagnostic& d);

class DiagnosticList {
  public:
    void error(ErrorCode code, const SourcePos& pos, std::string message);
    void warning(ErrorCode code, const SourcePos& pos, std::string message);
    void append(const DiagnosticList& other);
    void append(const std::vector<Diagnostic>& other);

    bool has_errors() const;
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }

    /// Stable sort by position; entries at the same position keep insertion order.
    std::vector<Diagnostic> sorted() const;
    const std::vector<Diagnostic>& items() const { return items_; }

  private:
    std::vector<Diagnostic> items_;
};

} // namespace lope
