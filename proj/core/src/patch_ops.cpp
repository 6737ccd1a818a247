#include "s2r/patch_ops.hpp"

#include "s2r/errors.hpp"

namespace s2r {

PatchStack patchify(const torch::Tensor& x, int grid_k) {
    require_shape(x.dim() == 4, "patchify: expected B×C×H×W input");
    require_arg(grid_k >= 1, "patchify: grid_k must be >= 1");
    const auto b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
    if (h % grid_k != 0 || w % grid_k != 0)
        throw ArgumentError("patchify: " + std::to_string(h) + "x" + std::to_string(w) +
                            " not divisible by grid_k=" + std::to_string(grid_k));
    PatchStack ps{x, grid_k, {b, c, h, w}};
    if (grid_k == 1) return ps;
    const auto k = static_cast<std::int64_t>(grid_k);
    const auto ph = h / k, pw = w / k;
    ps.data = x.reshape({b, c, k, ph, k, pw}).permute({0, 2, 4, 1, 3, 5}).reshape({b * k * k, c, ph, pw});
    return ps;
}

torch::Tensor unpatchify(const PatchStack& ps) {
    const auto [b, c, h, w] = ps.source_shape;
    const auto k = static_cast<std::int64_t>(ps.grid_k);
    require_shape(k >= 1 && b >= 0 && h % k == 0 && w % k == 0, "unpatchify: inconsistent grid metadata");
    require_shape(ps.data.dim() == 4 && ps.data.size(0) == b * k * k && ps.data.size(1) == c &&
                      ps.data.size(2) == h / k && ps.data.size(3) == w / k,
                  "unpatchify: patch data does not match grid metadata");
    if (k == 1) return ps.data;
    return ps.data.reshape({b, k, k, c, h / k, w / k}).permute({0, 3, 1, 4, 2, 5}).reshape({b, c, h, w});
}

}  // namespace s2r
