#pragma once

#include <filesystem>

#include <torch/torch.h>

namespace s2r {

// PNG <-> tensor conversion. Images are float32 3×H×W in [-1, 1] (RGB order);
// labels are int64 H×W holding the raw single-channel pixel value.

torch::Tensor read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const torch::Tensor& image);

torch::Tensor read_label_png(const std::filesystem::path& path);
void write_label_png(const std::filesystem::path& path, const torch::Tensor& ids);

// Quantize a [-1,1] image to 8 bits per channel (3×H×W uint8).
torch::Tensor to_uint8(const torch::Tensor& image);

// Tile N images (N×3×H×W) into a grid with `cols` columns.
torch::Tensor make_contact_sheet(const torch::Tensor& images, int cols);

}  // namespace s2r
