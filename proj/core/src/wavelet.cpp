#include "s2r/wavelet.hpp"

#include "s2r/errors.hpp"

namespace s2r {

using torch::indexing::None;
using torch::indexing::Slice;

torch::Tensor dwt2(const torch::Tensor& x) {
    require_shape(x.dim() == 4, "dwt2: expected B×C×H×W input");
    if (x.size(2) % 2 != 0 || x.size(3) % 2 != 0)
        throw ArgumentError("dwt2: spatial size " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                            " must be even");
    const auto a = x.index({Slice(), Slice(), Slice(0, None, 2), Slice(0, None, 2)});
    const auto b = x.index({Slice(), Slice(), Slice(0, None, 2), Slice(1, None, 2)});
    const auto c = x.index({Slice(), Slice(), Slice(1, None, 2), Slice(0, None, 2)});
    const auto d = x.index({Slice(), Slice(), Slice(1, None, 2), Slice(1, None, 2)});
    const auto ll = (a + b + c + d) * 0.5;
    const auto lh = (a - b + c - d) * 0.5;
    const auto hl = (a + b - c - d) * 0.5;
    const auto hh = (a - b - c + d) * 0.5;
    return torch::cat({ll, lh, hl, hh}, 1);
}

torch::Tensor idwt2(const torch::Tensor& coeffs) {
    require_shape(coeffs.dim() == 4 && coeffs.size(1) % 4 == 0, "idwt2: expected B×4C×h×w coefficients");
    const auto bands = coeffs.chunk(4, 1);
    const auto& ll = bands[0];
    const auto& lh = bands[1];
    const auto& hl = bands[2];
    const auto& hh = bands[3];
    const auto a = (ll + lh + hl + hh) * 0.5;
    const auto b = (ll - lh + hl - hh) * 0.5;
    const auto c = (ll + lh - hl - hh) * 0.5;
    const auto d = (ll - lh - hl + hh) * 0.5;
    const auto n = coeffs.size(0), ch = ll.size(1), h = ll.size(2), w = ll.size(3);
    const auto top = torch::stack({a, b}, -1).reshape({n, ch, h, 2 * w});
    const auto bottom = torch::stack({c, d}, -1).reshape({n, ch, h, 2 * w});
    return torch::stack({top, bottom}, 3).reshape({n, ch, 2 * h, 2 * w});
}

}  // namespace s2r
