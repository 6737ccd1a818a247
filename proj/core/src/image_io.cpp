#include "s2r/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "s2r/errors.hpp"

namespace s2r {

torch::Tensor read_rgb_png(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error("cannot read image " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8).clone();
    return t.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

torch::Tensor to_uint8(const torch::Tensor& image) {
    require_shape(image.dim() == 3 && image.size(0) == 3, "to_uint8: expected 3×H×W");
    return image.detach().to(torch::kFloat32).clamp(-1.0, 1.0).add(1.0).mul(127.5).round().to(torch::kUInt8);
}

void write_rgb_png(const std::filesystem::path& path, const torch::Tensor& image) {
    auto hwc = to_uint8(image).permute({1, 2, 0}).contiguous();
    cv::Mat rgb(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3, hwc.data_ptr<std::uint8_t>());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path.string(), bgr)) throw Error("cannot write image " + path.string());
}

torch::Tensor read_label_png(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw Error("cannot read label " + path.string());
    if (m.channels() != 1) throw Error("label is not single-channel: " + path.string());
    cv::Mat m32;
    m.convertTo(m32, CV_32S);
    return torch::from_blob(m32.data, {m32.rows, m32.cols}, torch::kInt32).to(torch::kLong);
}

void write_label_png(const std::filesystem::path& path, const torch::Tensor& ids) {
    require_shape(ids.dim() == 2, "write_label_png: expected H×W ids");
    require_arg((ids >= 0).all().item<bool>() && (ids < 256).all().item<bool>(),
                "write_label_png: ids must fit in 8 bits");
    auto u8 = ids.to(torch::kUInt8).contiguous();
    cv::Mat m(static_cast<int>(u8.size(0)), static_cast<int>(u8.size(1)), CV_8UC1, u8.data_ptr<std::uint8_t>());
    if (!cv::imwrite(path.string(), m)) throw Error("cannot write label " + path.string());
}

torch::Tensor make_contact_sheet(const torch::Tensor& images, int cols) {
    require_shape(images.dim() == 4 && images.size(1) == 3, "contact sheet: expected N×3×H×W");
    require_arg(cols > 0, "contact sheet: cols must be positive");
    const auto n = images.size(0);
    const auto h = images.size(2), w = images.size(3);
    const auto rows = (n + cols - 1) / cols;
    auto sheet = torch::full({3, rows * h, cols * w}, -1.0f);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = i / cols, c = i % cols;
        sheet.slice(1, r * h, (r + 1) * h).slice(2, c * w, (c + 1) * w).copy_(images[i].detach().to(torch::kFloat32));
    }
    return sheet;
}

}  // namespace s2r
