#include "lope/codegen/emit_c.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace lope::codegen {

using namespace lowering;

namespace {

const std::set<std::string> kCKeywords = {
    "auto",     "break",    "case",     "char",    "const",    "continue", "default",  "do",
    "double",   "else",     "enum",     "extern",  "float",    "for",      "goto",     "if",
    "inline",   "int",      "long",     "register", "restrict", "return",  "short",    "signed",
    "sizeof",   "static",   "struct",   "switch",  "typedef",  "union",    "unsigned", "void",
    "volatile", "while",    "kernel",   "global",  "local",    "constant", "private",  "half",
    "bool",     "true",     "false",    "abs",     "min",      "max",      "fabs",     "fmin",
    "fmax",     "sqrt",     "get_global_id"};

std::string real_literal(double v, bool single)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEni") == std::string::npos)
        s += ".0";
    if (single)
        s += "f";
    return s;
}

class Emitter {
  public:
    Emitter(const KernelIR& ir, const EmitConfig& config) : ir_(ir), cfg_(config)
    {
        if (cfg_.real_c_type != "float" && cfg_.real_c_type != "double")
            throw std::invalid_argument("real type must be float or double, got '" + cfg_.real_c_type + "'");
        for (const auto& a : ir_.array_params) {
            if (a.logical)
                throw UnsupportedType("logical array '" + a.name + "' cannot be emitted");
            rank_ = std::max(rank_, a.rank);
        }
        reserve_generated();
        for (const auto& a : ir_.array_params)
            array_names_.push_back(fresh(a.name));
        for (const auto& s : ir_.scalar_params)
            scalar_names_.push_back(fresh(s.name));
        for (const auto& l : ir_.locals)
            local_names_.push_back(fresh(l.name));
    }

    std::string run()
    {
        std::string out = "__kernel void " + fresh_kernel_name() + "(\n";
        std::vector<std::string> params;
        for (std::size_t k = 0; k < ir_.array_params.size(); ++k) {
            std::string t = elem_type(ir_.array_params[k].elem);
            params.push_back("__global const " + t + "* " + array_names_[k] + "_in");
            params.push_back("__global " + t + "* " + array_names_[k] + "_out");
        }
        for (int d = 0; d < rank_; ++d)
            params.push_back("const long m" + std::to_string(d));
        for (int d = 0; d < rank_; ++d)
            params.push_back("const long base" + std::to_string(d));
        for (std::size_t k = 0; k < ir_.array_params.size(); ++k) {
            for (int d = 0; d < ir_.array_params[k].rank; ++d) {
                params.push_back("const long " + array_names_[k] + "_lo" + std::to_string(d));
                params.push_back("const long " + array_names_[k] + "_hi" + std::to_string(d));
            }
        }
        for (std::size_t k = 0; k < ir_.scalar_params.size(); ++k)
            params.push_back("const " + elem_type(ir_.scalar_params[k].type) + " " + scalar_names_[k]);
        for (std::size_t k = 0; k < params.size(); ++k)
            out += "    " + params[k] + (k + 1 < params.size() ? ",\n" : ")\n");
        out += "{\n";
        for (int d = 0; d < rank_; ++d) {
            std::string ds = std::to_string(d);
            line(out, "const long i" + ds + " = base" + ds + " + get_global_id(" + ds + ");");
        }
        for (std::size_t k = 0; k < ir_.array_params.size(); ++k) {
            const std::string& a = array_names_[k];
            int r = ir_.array_params[k].rank;
            for (int d = 0; d < r; ++d) {
                std::string ds = std::to_string(d);
                std::string rhs = d == 0 ? "1"
                                         : a + "_s" + std::to_string(d - 1) + " * (m" + std::to_string(d - 1) +
                                               " + " + a + "_lo" + std::to_string(d - 1) + " + " + a + "_hi" +
                                               std::to_string(d - 1) + ")";
                line(out, "const long " + a + "_s" + ds + " = " + rhs + ";");
            }
            std::string idx;
            for (int d = 0; d < r; ++d) {
                std::string ds = std::to_string(d);
                if (d != 0)
                    idx += " + ";
                idx += "(i" + ds + " - 1 + " + a + "_lo" + ds + ") * " + a + "_s" + ds;
            }
            line(out, "const long " + a + "_idx = " + idx + ";");
        }
        for (std::size_t k = 0; k < ir_.locals.size(); ++k)
            line(out, elem_type(ir_.locals[k].type) + " " + local_names_[k] + " = 0;");
        for (const auto& s : ir_.body) {
            std::string lhs = s.target == IRAssign::Target::Array
                                  ? array_names_[static_cast<std::size_t>(s.slot)] + "_out[" +
                                        array_names_[static_cast<std::size_t>(s.slot)] + "_idx]"
                                  : local_names_[static_cast<std::size_t>(s.slot)];
            line(out, lhs + " = " + expr(s.expr) + ";");
        }
        out += "}\n";
        return out;
    }

  private:
    static void line(std::string& out, const std::string& text) { out += "    " + text + "\n"; }

    std::string elem_type(ValueType t) const { return t == ValueType::Int ? "long" : cfg_.real_c_type; }

    void reserve_generated()
    {
        for (int d = 0; d < rank_; ++d) {
            std::string ds = std::to_string(d);
            taken_.insert({"i" + ds, "m" + ds, "base" + ds});
        }
    }

    // Every user name gets a spelling that is not a C word and whose derived
    // names (x_in, x_idx, ...) cannot clash with another user name.
    std::string fresh(const std::string& name)
    {
        static const std::vector<std::string> suffixes = {"", "_in", "_out", "_idx", "_s0", "_s1", "_s2",
                                                          "_lo0", "_lo1", "_lo2", "_hi0", "_hi1", "_hi2"};
        std::string s = name;
        auto clashes = [&](const std::string& c) {
            return std::any_of(suffixes.begin(), suffixes.end(), [&](const std::string& suf) {
                return kCKeywords.count(c + suf) != 0 || taken_.count(c + suf) != 0 || user_.count(c + suf) != 0;
            }) || std::any_of(user_.begin(), user_.end(), [&](const std::string& u) {
                return std::any_of(suffixes.begin(), suffixes.end(), [&](const std::string& suf) {
                    return u + suf == c;
                });
            });
        };
        while (clashes(s))
            s += "_";
        user_.insert(s);
        return s;
    }

    std::string fresh_kernel_name()
    {
        std::string s = ir_.name;
        while (kCKeywords.count(s) != 0 || taken_.count(s) != 0 || user_.count(s) != 0)
            s += "_";
        return s;
    }

    std::string read(const OffsetRead& r) const
    {
        const std::string& a = array_names_[static_cast<std::size_t>(r.array_slot)];
        std::string s = a + (r.from_output ? "_out[" : "_in[") + a + "_idx";
        for (std::size_t d = 0; d < r.offsets.size(); ++d) {
            if (r.offsets[d] != 0)
                s += " + (" + std::to_string(r.offsets[d]) + ") * " + a + "_s" + std::to_string(d);
        }
        return s + "]";
    }

    std::string expr(const IRExpr& e) const
    {
        return std::visit(
            [&](const auto& n) -> std::string {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, ConstNode>) {
                    if (e.type == ValueType::Int)
                        return n.int_value < 0 ? "(" + std::to_string(n.int_value) + ")"
                                               : std::to_string(n.int_value);
                    std::string lit = real_literal(n.real_value, cfg_.real_c_type == "float");
                    return std::signbit(n.real_value) ? "(" + lit + ")" : lit;
                } else if constexpr (std::is_same_v<T, ScalarRead>) {
                    const auto& names = n.kind == ScalarKind::Local ? local_names_ : scalar_names_;
                    return names[static_cast<std::size_t>(n.slot)];
                } else if constexpr (std::is_same_v<T, OffsetRead>) {
                    return read(n);
                } else if constexpr (std::is_same_v<T, BinNode>) {
                    const char* op = n.op == IROp::Add ? " + " : n.op == IROp::Mul ? " * " : " / ";
                    return "(" + expr(*n.lhs) + op + expr(*n.rhs) + ")";
                } else if constexpr (std::is_same_v<T, NegNode>) {
                    return "(-" + expr(*n.operand) + ")";
                } else {
                    bool is_int = e.type == ValueType::Int;
                    auto arg = [&](std::size_t k) { return expr(n.args[k]); };
                    switch (n.fn) {
                    case IntrinsicFn::Abs: return std::string(is_int ? "abs(" : "fabs(") + arg(0) + ")";
                    case IntrinsicFn::Sqrt: return "sqrt(" + arg(0) + ")";
                    case IntrinsicFn::Min:
                    case IntrinsicFn::Max: {
                        std::string fn = n.fn == IntrinsicFn::Min ? "min" : "max";
                        if (!is_int)
                            fn = "f" + fn;
                        std::string acc = arg(0);
                        for (std::size_t k = 1; k < n.args.size(); ++k)
                            acc = fn + "(" + acc + ", " + arg(k) + ")";
                        return acc;
                    }
                    case IntrinsicFn::ThisImage: break;
                    }
                    throw UnsupportedType("intrinsic not available in kernels");
                }
            },
            e.node);
    }

    const KernelIR& ir_;
    EmitConfig cfg_;
    int rank_ = 0;
    std::set<std::string> taken_;
    std::set<std::string> user_;
    std::vector<std::string> array_names_;
    std::vector<std::string> scalar_names_;
    std::vector<std::string> local_names_;
};

} // namespace

std::string emit_kernel_source(const KernelIR& ir, const EmitConfig& config)
{
    return Emitter(ir, config).run();
}

} // namespace lope::codegen
