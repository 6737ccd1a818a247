#include "s2r/layout.hpp"

#include <sstream>

#include "s2r/errors.hpp"

namespace s2r {

void check_id_range(const torch::Tensor& ids, int num_classes) {
    if (ids.numel() == 0) return;
    const auto bad = (ids < 0).logical_or(ids >= num_classes);
    if (!bad.any().item<bool>()) return;
    const auto first = bad.flatten().nonzero()[0].item<std::int64_t>();
    // Unravel to a coordinate for the message.
    std::vector<std::int64_t> coord(static_cast<std::size_t>(ids.dim()));
    auto rem = first;
    for (auto d = ids.dim() - 1; d >= 0; --d) {
        coord[static_cast<std::size_t>(d)] = rem % ids.size(d);
        rem /= ids.size(d);
    }
    std::ostringstream msg;
    msg << "class id " << ids.flatten()[first].item<std::int64_t>() << " at pixel (";
    for (std::size_t i = 0; i < coord.size(); ++i) msg << (i ? "," : "") << coord[i];
    msg << ") outside [0, " << num_classes << ")";
    throw OutOfRangeError(msg.str());
}

torch::Tensor one_hot_encode(const torch::Tensor& ids, int num_classes, torch::Dtype dtype) {
    require_arg(num_classes >= 2, "one_hot_encode: num_classes must be >= 2");
    require_shape(ids.dim() == 2 || ids.dim() == 3, "one_hot_encode: expected H×W or B×H×W ids");
    check_id_range(ids, num_classes);
    auto oh = torch::one_hot(ids.to(torch::kLong), num_classes).to(dtype);
    // (..., H, W, C) -> (..., C, H, W)
    return ids.dim() == 2 ? oh.permute({2, 0, 1}).contiguous() : oh.permute({0, 3, 1, 2}).contiguous();
}

torch::Tensor argmax_ids(const torch::Tensor& onehot) {
    require_shape(onehot.dim() == 3 || onehot.dim() == 4, "argmax_ids: expected C×H×W or B×C×H×W");
    return onehot.argmax(onehot.dim() - 3);
}

}  // namespace s2r
