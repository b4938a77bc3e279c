#pragma once

#include <cstdint>
#include <vector>

namespace lope::runtime {

/// P images on an MP x NP logical grid. Image k sits at grid coordinate
/// c1 = ((k-1) mod MP) + 1 along the first codimension and
/// c2 = ((k-1) div MP) + 1 along the second.
struct ProcessGrid {
    int images = 1;
    int rows = 1; // MP
    int cols = 1; // NP

    int prow(int image) const { return (image - 1) % rows + 1; }
    int pcol(int image) const { return (image - 1) / rows + 1; }
    /// Image at (c1, c2) after cyclic reduction of both coordinates.
    int image_at(std::int64_t c1, std::int64_t c2) const;
};

/// Throws RuntimeError(E201) unless P >= 1, MP >= 1 and MP divides P.
ProcessGrid create_grid(int images, int rows);

/// Images per codimension for a coarray of the given corank: {P} for corank
/// 1, {MP, NP} for corank 2, {} for a non-coarray.
std::vector<std::int64_t> coarray_shape(const ProcessGrid& grid, int corank);

/// 1-based coordinates of an image in a coarray shape (first coordinate fastest).
std::vector<std::int64_t> image_coords(const std::vector<std::int64_t>& shape, int image);

/// Image at the given coordinates, each reduced cyclically into 1..shape[d].
int image_of(const std::vector<std::int64_t>& shape, const std::vector<std::int64_t>& coords);

/// ((x - 1) mod n) + 1 with a non-negative result.
std::int64_t wrap1(std::int64_t x, std::int64_t n);

} // namespace lope::runtime
