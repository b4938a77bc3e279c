#include "lope/frontend/ast.hpp"

#include <algorithm>

namespace lope::frontend {

bool HaloSpec::fully_explicit() const
{
    return std::all_of(dims.begin(), dims.end(), [](const auto& d) { return d.has_value(); });
}

const KernelDef* Program::find_kernel(const std::string& name) const
{
    for (const auto& k : kernels) {
        if (k.name == name)
            return &k;
    }
    return nullptr;
}

std::string_view intrinsic_name(IntrinsicFn fn)
{
    switch (fn) {
    case IntrinsicFn::ThisImage: return "this_image";
    case IntrinsicFn::Abs: return "abs";
    case IntrinsicFn::Min: return "min";
    case IntrinsicFn::Max: return "max";
    case IntrinsicFn::Sqrt: return "sqrt";
    }
    return "?";
}

std::optional<IntrinsicFn> intrinsic_from_name(std::string_view name)
{
    for (auto fn : {IntrinsicFn::ThisImage, IntrinsicFn::Abs, IntrinsicFn::Min, IntrinsicFn::Max,
                    IntrinsicFn::Sqrt}) {
        if (intrinsic_name(fn) == name)
            return fn;
    }
    return std::nullopt;
}

} // namespace lope::frontend
