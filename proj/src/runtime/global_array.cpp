#include "lope/runtime/global_array.hpp"

#include "lope/runtime/grid.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace lope::runtime {

namespace {

class PeriodicAccess : public lowering::PointAccess {
  public:
    PeriodicAccess(const std::vector<GlobalArray>& in, std::vector<GlobalArray>& out, std::int64_t i, std::int64_t j)
        : in_(in), out_(out), i_(i), j_(j)
    {
    }
    double read(const lowering::OffsetRead& r) override
    {
        const auto& a = r.from_output ? out_ : in_;
        const GlobalArray& g = a[static_cast<std::size_t>(r.array_slot)];
        std::int64_t i = wrap1(i_ + r.offsets[0], g.m);
        std::int64_t j = r.offsets.size() > 1 ? wrap1(j_ + r.offsets[1], g.n) : 1;
        return g.at(i, j);
    }
    void write(int slot, double v) override { out_[static_cast<std::size_t>(slot)].at(i_, j_) = v; }

  private:
    const std::vector<GlobalArray>& in_;
    std::vector<GlobalArray>& out_;
    std::int64_t i_;
    std::int64_t j_;
};

} // namespace

GlobalArray parse_array_text(const std::string& text)
{
    std::istringstream in(text);
    std::string word;
    auto next_int = [&](const char* what) {
        if (!(in >> word))
            throw std::runtime_error(std::string("array file: missing ") + what);
        char* end = nullptr;
        errno = 0;
        long long v = std::strtoll(word.c_str(), &end, 10);
        if (*end != '\0' || errno != 0 || v < 1)
            throw std::runtime_error(std::string("array file: bad ") + what + " '" + word + "'");
        return static_cast<std::int64_t>(v);
    };
    std::int64_t m = next_int("extent M");
    std::int64_t n = next_int("extent N");
    if (m * n > (std::int64_t{1} << 28))
        throw std::runtime_error("array file: extents too large");
    GlobalArray a(m, n);
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        if (!(in >> word))
            throw std::runtime_error("array file: expected " + std::to_string(a.data.size()) + " values, got " +
                                     std::to_string(k));
        char* end = nullptr;
        a.data[k] = std::strtod(word.c_str(), &end);
        if (*end != '\0')
            throw std::runtime_error("array file: bad value '" + word + "'");
    }
    if (in >> word)
        throw std::runtime_error("array file: trailing data '" + word + "'");
    return a;
}

std::string format_array_text(const GlobalArray& a)
{
    std::string out = std::to_string(a.m) + " " + std::to_string(a.n) + "\n";
    char buf[40];
    for (std::int64_t j = 1; j <= a.n; ++j) {
        for (std::int64_t i = 1; i <= a.m; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", a.at(i, j));
            if (i != 1)
                out += ' ';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::vector<GlobalArray> oracle_step(const std::vector<GlobalArray>& in, const lowering::KernelIR& ir, int rank,
                                     const std::vector<lowering::Value>& scalar_args)
{
    std::vector<GlobalArray> out = in;
    const GlobalArray& shape = in.at(0);
    std::int64_t n = rank == 1 ? 1 : shape.n;
    for (std::int64_t j = 1; j <= n; ++j) {
        for (std::int64_t i = 1; i <= shape.m; ++i) {
            PeriodicAccess access(in, out, i, j);
            lowering::run_point(ir, scalar_args, access);
        }
    }
    return out;
}

} // namespace lope::runtime
