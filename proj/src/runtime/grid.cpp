#include "lope/runtime/grid.hpp"

#include "lope/runtime/error.hpp"

namespace lope::runtime {

std::string format_runtime_error(const RuntimeError& e)
{
    std::string s = e.pos.file + ":" + std::to_string(e.pos.line) + ":" + std::to_string(e.pos.col) + ": error";
    if (e.code)
        s += "[" + code_name(*e.code) + "]";
    return s + ": " + e.what();
}

std::int64_t wrap1(std::int64_t x, std::int64_t n)
{
    std::int64_t r = (x - 1) % n;
    if (r < 0)
        r += n;
    return r + 1;
}

int ProcessGrid::image_at(std::int64_t c1, std::int64_t c2) const
{
    return static_cast<int>((wrap1(c2, cols) - 1) * rows + wrap1(c1, rows));
}

ProcessGrid create_grid(int images, int rows)
{
    if (images < 1)
        throw RuntimeError(ErrorCode::GridFactorization, "image count must be at least 1, got " + std::to_string(images));
    if (rows < 1)
        throw RuntimeError(ErrorCode::GridFactorization, "grid rows must be at least 1, got " + std::to_string(rows));
    if (images % rows != 0) {
        throw RuntimeError(ErrorCode::GridFactorization, std::to_string(rows) + " grid rows do not divide " +
                                                             std::to_string(images) + " images");
    }
    return ProcessGrid{images, rows, images / rows};
}

std::vector<std::int64_t> coarray_shape(const ProcessGrid& grid, int corank)
{
    if (corank == 0)
        return {};
    if (corank == 1)
        return {grid.images};
    std::vector<std::int64_t> s{grid.rows, grid.cols};
    for (int d = 2; d < corank; ++d)
        s.push_back(1);
    return s;
}

std::vector<std::int64_t> image_coords(const std::vector<std::int64_t>& shape, int image)
{
    std::vector<std::int64_t> c;
    std::int64_t k = image - 1;
    for (auto n : shape) {
        c.push_back(k % n + 1);
        k /= n;
    }
    return c;
}

int image_of(const std::vector<std::int64_t>& shape, const std::vector<std::int64_t>& coords)
{
    std::int64_t k = 0;
    std::int64_t stride = 1;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        k += (wrap1(coords[d], shape[d]) - 1) * stride;
        stride *= shape[d];
    }
    return static_cast<int>(k + 1);
}

} // namespace lope::runtime
